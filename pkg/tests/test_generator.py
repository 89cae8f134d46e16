"""Instance generation: depth control, distractor inertness, reproducibility."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symchain import depth_of, fixpoint_eval, render
from symchain.chaining import ChainingStrategy
from symchain.errors import ConfigError
from symchain.generator import GenConfig, gen_instance, gen_pretraining, gen_split
from symchain.lang import Add, Direct, Num, Question, Var
from symchain.rendering import instances_to_jsonl
from symchain.semantics import necessary_set


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 12))
@settings(max_examples=200, deadline=None)
def test_exact_depth(seed, depth):
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    assert inst.depth == depth == depth_of(inst.question)


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=150, deadline=None)
def test_distractor_inertness(seed, depth):
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    needed = {eq.lhs for eq in necessary_set(inst.question)}
    trimmed = Question(
        tuple(eq for eq in inst.question.equations if eq.lhs in needed),
        inst.question.target,
    )
    assert fixpoint_eval(trimmed)[trimmed.target] == inst.answer
    assert depth_of(trimmed) == inst.depth


@given(seed=st.integers(min_value=0, max_value=2**63), depth=st.integers(1, 10))
@settings(max_examples=150, deadline=None)
def test_structural_invariants(seed, depth):
    inst = gen_instance(GenConfig(seed=seed, depth=depth))
    seen = set()
    for eq in inst.question.equations:
        assert eq.lhs not in seen
        seen.add(eq.lhs)
        ops = (eq.rhs.operand,) if isinstance(eq.rhs, Direct) else (eq.rhs.left, eq.rhs.right)
        assert sum(isinstance(op, Var) for op in ops) <= 1
        assert all(0 <= op.value <= 99 for op in ops if isinstance(op, Num))
        assert eq.lhs not in eq.rhs_vars()


def test_reproducibility():
    cfg = GenConfig(seed=123456789, depth=5, distractors=2)
    assert gen_instance(cfg) == gen_instance(cfg)
    a = gen_split(42, [1, 2, 3], 5)
    b = gen_split(42, [1, 2, 3], 5)
    assert instances_to_jsonl(a) == instances_to_jsonl(b)


def test_split_counts_and_order():
    insts = gen_split(7, [1, 2, 3], 4)
    assert len(insts) == 12
    assert [i.depth for i in insts] == [1] * 4 + [2] * 4 + [3] * 4
    assert len({i.id for i in insts}) == 12


def test_split_single():
    insts = gen_split(9, [2], 1)
    assert len(insts) == 1 and insts[0].depth == 2


def test_fixed_distractor_flag():
    for seed in range(20):
        inst = gen_instance(GenConfig(seed=seed, depth=3, distractors=1))
        assert len(inst.question.equations) == 4
    for seed in range(20):
        inst = gen_instance(GenConfig(seed=seed, depth=1, distractors=0))
        assert render(inst.question.equations[0]).startswith(inst.question.target)


def test_default_distractors_sampled_one_to_three():
    counts = {
        len(gen_instance(GenConfig(seed=seed, depth=2)).question.equations) - 2
        for seed in range(80)
    }
    assert counts == {1, 2, 3}


def test_figure_shape_witness():
    """A depth-3 instance whose distractor consumes a chain variable exists."""
    for seed in range(200):
        inst = gen_instance(GenConfig(seed=seed, depth=3, distractors=1))
        needed = {eq.lhs for eq in necessary_set(inst.question)}
        (extra,) = [eq for eq in inst.question.equations if eq.lhs not in needed]
        if any(v in needed for v in extra.rhs_vars()):
            return
    pytest.fail("no distractor referencing a chain variable in 200 seeds")


def test_config_validation():
    with pytest.raises(ConfigError):
        gen_instance(GenConfig(seed=1, depth=0))
    with pytest.raises(ConfigError):
        gen_instance(GenConfig(seed=1, depth=3, distractors=-1))
    with pytest.raises(ConfigError):
        gen_instance(GenConfig(seed=1, depth=25, distractors=5))  # 26-letter pool
    with pytest.raises(ConfigError):
        gen_instance(GenConfig(seed=1, depth=1, modulus=7))
    with pytest.raises(ConfigError):
        gen_split(1, [1], 0)


class TestPretraining:
    def test_two_types_alternate(self):
        insts = gen_pretraining(5, count=2)
        assert isinstance(insts[0].question.equations[0].rhs, Direct)
        assert isinstance(insts[1].question.equations[0].rhs, Add)

    def test_all_single_depth_no_distractors(self):
        insts = gen_pretraining(5, count=50)
        assert all(i.depth == 1 and len(i.question.equations) == 1 for i in insts)

    def test_answers_match_oracle(self):
        for inst in gen_pretraining(5, count=40):
            assert inst.answer == fixpoint_eval(inst.question)[inst.question.target]

    def test_operate_assign_refer_is_numeral_addition(self):
        insts = gen_pretraining(5, count=20)
        for inst in insts[1::2]:
            rhs = inst.question.equations[0].rhs
            assert isinstance(rhs, Add)
            assert isinstance(rhs.left, Num) and isinstance(rhs.right, Num)

    def test_gold_traces_present(self):
        inst = gen_pretraining(5, count=2)[1]
        assert set(inst.gold) == set(ChainingStrategy)
        # `X=a+b` reduces to its value in one result line.
        assert len(inst.gold[ChainingStrategy.SHORTEST].lines) == 2
