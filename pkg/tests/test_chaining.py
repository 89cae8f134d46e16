"""Trace engines checked against hand-frozen values and the string oracles."""

from hypothesis import given, settings
from hypothesis import strategies as st

from symchain import parse_question, render
from symchain.chaining import (
    ChainingStrategy,
    backward_trace,
    exhaustive_trace,
    gold_traces,
    none_trace,
    shortest_trace,
    trace_for,
)
from symchain.generator import GenConfig, gen_instance
from symchain.verifier import check_chain

from conftest import DISTRACTOR_QUESTION, FOUR_EQ_QUESTION, PLAIN_QUESTION, TWO_EQ_QUESTION
from oracles import simulate_backward, simulate_exhaustive, simulate_shortest


class TestFrozenTraces:
    """Expected strings computed with the independent oracles up front."""

    def test_shortest(self):
        cases = {
            FOUR_EQ_QUESTION: "A=1, B=A+1, B=1+1, B=2, C=3+B, C=3+2, C=5",
            DISTRACTOR_QUESTION: "A=1, B=2+A, B=2+1, B=3, C=5+B, C=5+3, C=8",
            TWO_EQ_QUESTION: "A=1, B=2+A, B=2+1, B=3",
            "A=1, A?": "A=1",
            "A=1+3, A?": "A=1+3, A=4",
        }
        for text, expected in cases.items():
            assert render(shortest_trace(parse_question(text))) == expected

    def test_exhaustive(self):
        cases = {
            FOUR_EQ_QUESTION: "A=1, D=A+2, D=1+2, D=3, B=A+1, B=1+1, B=2, C=3+B, C=3+2, C=5",
            # The post-restart scan reaches the target before the distractor.
            DISTRACTOR_QUESTION: "A=1, B=2+A, B=2+1, B=3, C=5+B, C=5+3, C=8",
            "A=1, A?": "A=1",
        }
        for text, expected in cases.items():
            assert render(exhaustive_trace(parse_question(text))) == expected

    def test_backward(self):
        cases = {
            FOUR_EQ_QUESTION: "C=3+B, B=A+1, A=1, B=1+1, B=2, C=3+2, C=5",
            DISTRACTOR_QUESTION: "C=5+B, B=2+A, A=1, B=2+1, B=3, C=5+3, C=8",
            "A=1, A?": "A=1",
            "A=1+3, A?": "A=1+3, A=4",  # numeral-only base is already a known value
        }
        for text, expected in cases.items():
            assert render(backward_trace(parse_question(text))) == expected

    def test_none(self):
        cases = {
            FOUR_EQ_QUESTION: "C=5",
            PLAIN_QUESTION: "C=6",
            "A=1, A?": "A=1",
        }
        for text, expected in cases.items():
            assert render(none_trace(parse_question(text))) == expected

    def test_no_distractors_exhaustive_equals_shortest(self):
        q = parse_question("A=1, B=2+A, C=3+B, C?")
        assert render(exhaustive_trace(q)) == render(shortest_trace(q))


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=150, deadline=None)
def test_engines_match_string_oracles(seed, depth):
    """Dual route: AST engines vs the independent text-level simulators."""
    q = gen_instance(GenConfig(seed=seed, depth=depth)).question
    text = render(q)
    assert render(shortest_trace(q)) == simulate_shortest(text)
    assert render(exhaustive_trace(q)) == simulate_exhaustive(text)
    assert render(backward_trace(q)) == simulate_backward(text)


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=150, deadline=None)
def test_gold_soundness_and_laws(seed, depth):
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    q = inst.question
    for strategy, trace in inst.gold.items():
        verdict = check_chain(q, trace, trace)
        assert verdict.chain_correct and verdict.answer_correct and not verdict.errors
        last = trace.lines[-1]
        assert last.lhs == q.target and not last.rhs_vars()
        assert render(last) == f"{q.target}={inst.answer}"

    shortest = inst.gold[ChainingStrategy.SHORTEST]
    exhaustive = inst.gold[ChainingStrategy.EXHAUSTIVE]
    backward = inst.gold[ChainingStrategy.BACKWARD]
    # Containment and length ordering.
    assert set(shortest.lines) <= set(exhaustive.lines)
    assert len(render(exhaustive)) >= len(render(shortest))
    # Backward's copies reverse shortest's equation order.
    shortest_eq_order = []
    for line in shortest.lines:
        if line.lhs not in shortest_eq_order:
            shortest_eq_order.append(line.lhs)
    backward_copy_order = []
    for line in backward.lines:
        if line.lhs in backward_copy_order:
            break
        backward_copy_order.append(line.lhs)
    assert backward_copy_order == list(reversed(shortest_eq_order))


def test_trace_for_dispatch(four_eq_question):
    for cs in ChainingStrategy:
        assert render(trace_for(four_eq_question, cs)) == render(gold_traces(four_eq_question)[cs])
