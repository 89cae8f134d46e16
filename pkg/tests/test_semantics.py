"""Dependency graph, fixpoint oracle, depth, and necessary set."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symchain import (
    answer,
    build_graph,
    depth_of,
    fixpoint_eval,
    necessary_set,
    parse_question,
    render,
)
from symchain.errors import CycleError
from symchain.generator import GenConfig, gen_instance
from symchain.lang import Question
from symchain.rng import SplitMix64
from symchain.semantics import distractors

from conftest import PLAIN_QUESTION


class TestBuildGraph:
    def test_edges(self, four_eq_question):
        g = build_graph(four_eq_question)
        assert g.edges == {("D", "A"), ("B", "A"), ("C", "B")}
        assert g.nodes == {"A", "B", "C", "D"}

    def test_single_node(self):
        g = build_graph(parse_question("A=1, A?"))
        assert g.nodes == {"A"} and g.edges == set()

    def test_cycle(self):
        with pytest.raises(CycleError):
            build_graph(parse_question("A=B+1, B=A+1, A?"))

    def test_self_reference_cycle(self):
        with pytest.raises(CycleError):
            fixpoint_eval(parse_question("A=A+1, A?"))


class TestFixpointEval:
    def test_plain_question(self):
        assert fixpoint_eval(parse_question(PLAIN_QUESTION)) == {"A": 1, "B": 3, "C": 6, "D": 2}

    def test_modular_wraparound(self):
        assert fixpoint_eval(parse_question("A=99, B=3+A, B?")) == {"A": 99, "B": 2}

    def test_with_distractor(self, four_eq_question):
        # Frozen from the string-substitution oracle (tests/oracles.py).
        assert fixpoint_eval(four_eq_question) == {"D": 3, "A": 1, "B": 2, "C": 5}

    def test_answer_projection(self, four_eq_question):
        assert answer(four_eq_question) == 5
        assert answer(parse_question(PLAIN_QUESTION)) == 6


class TestDepth:
    def test_depth_with_distractor_equation(self):
        assert depth_of(parse_question(PLAIN_QUESTION)) == 3

    def test_depth_one(self):
        assert depth_of(parse_question("A=1, A?")) == 1

    def test_depth_ignores_distractor(self, four_eq_question):
        assert depth_of(four_eq_question) == 3


class TestNecessarySet:
    def test_base_first_order(self, four_eq_question):
        assert [render(eq) for eq in necessary_set(four_eq_question)] == ["A=1", "B=A+1", "C=3+B"]

    def test_single(self):
        assert [render(eq) for eq in necessary_set(parse_question("A=1, A?"))] == ["A=1"]

    def test_distractor_question_order(self, distractor_question):
        assert [render(eq) for eq in necessary_set(distractor_question)] == [
            "A=1",
            "B=2+A",
            "C=5+B",
        ]


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=200, deadline=None)
def test_oracle_order_independence(seed, depth):
    """Shuffling the equation list never changes the valuation."""
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    baseline = fixpoint_eval(inst.question)
    eqs = list(inst.question.equations)
    SplitMix64(seed ^ 0xABCDEF).shuffle(eqs)
    assert fixpoint_eval(Question(tuple(eqs), inst.question.target)) == baseline


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=200, deadline=None)
def test_partition_and_bounds(seed, depth):
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    q = inst.question
    needed = necessary_set(q)
    extra = distractors(q)
    assert depth_of(q) <= len(q.equations)
    assert (depth_of(q) == len(q.equations)) == (not extra)
    assert {render(e) for e in needed} | {render(e) for e in extra} == {
        render(e) for e in q.equations
    }
    assert {render(e) for e in needed} & {render(e) for e in extra} == set()
    assert all(0 <= v <= 99 for v in fixpoint_eval(q).values())


def test_unsolvable_target():
    # Parseable but with a cyclic distractor group: the oracle refuses it.
    q = parse_question("A=1, B=C+1, C=B+1, A?")
    with pytest.raises(CycleError):
        fixpoint_eval(q)
