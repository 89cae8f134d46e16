"""Seeded instance sampling with exact depth control.

The necessary chain is strictly linear: a base assignment, then one addition
per link consuming exactly the previous variable, with the variable placed on
a uniformly random side.  Distractors are additions over a fresh numeral and
either another numeral or a previously defined variable; since no chain
equation ever mentions a distractor variable, the target can never depend on
one, so the requested depth holds by construction.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .chaining import ChainingStrategy, gold_traces
from .errors import ConfigError
from .lang import MAX_NUMERAL, MODULUS, Add, Direct, Equation, Num, Question, Trace, Var
from .rng import SplitMix64, derive_seed
from .semantics import answer as oracle_answer
from .semantics import depth_of

DEFAULT_ALPHABET = tuple(string.ascii_uppercase)

# Branch tags keep the split/pretraining child-seed streams disjoint.
_SPLIT_BRANCH = 1
_PRETRAIN_BRANCH = 2


@dataclass(frozen=True)
class GenConfig:
    seed: int
    depth: int
    distractors: int | None = None  # None: sample uniformly from {1, 2, 3}
    modulus: int = MODULUS
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET

    def validate(self) -> None:
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.distractors is not None and self.distractors < 0:
            raise ConfigError(f"distractors must be >= 0, got {self.distractors}")
        if self.modulus != MODULUS:
            raise ConfigError(f"modulus is fixed at {MODULUS}")
        worst = self.depth + (self.distractors if self.distractors is not None else 3)
        if worst > len(self.alphabet):
            raise ConfigError(
                f"alphabet has {len(self.alphabet)} names; need up to {worst}"
            )


@dataclass(frozen=True, eq=True)
class Instance:
    id: str
    question: Question
    answer: int
    depth: int
    gold: dict[ChainingStrategy, Trace]


def gen_instance(cfg: GenConfig, instance_id: str | None = None) -> Instance:
    cfg.validate()
    rng = SplitMix64(cfg.seed)

    n_distractors = cfg.distractors
    if n_distractors is None:
        n_distractors = rng.randint(1, 3)

    pool = list(cfg.alphabet)
    rng.shuffle(pool)
    chain_vars = pool[: cfg.depth]
    distractor_vars = pool[cfg.depth : cfg.depth + n_distractors]

    equations: list[Equation] = [Equation(chain_vars[0], Direct(Num(rng.randint(0, MAX_NUMERAL))))]
    for i in range(1, cfg.depth):
        prev = Var(chain_vars[i - 1])
        num = Num(rng.randint(0, MAX_NUMERAL))
        rhs = Add(prev, num) if rng.chance(0.5) else Add(num, prev)
        equations.append(Equation(chain_vars[i], rhs))

    defined = list(chain_vars)
    for name in distractor_vars:
        ref = Num(rng.randint(0, MAX_NUMERAL)) if rng.chance(0.5) else Var(rng.choice(defined))
        num = Num(rng.randint(0, MAX_NUMERAL))
        rhs = Add(ref, num) if rng.chance(0.5) else Add(num, ref)
        equations.append(Equation(name, rhs))
        defined.append(name)

    rng.shuffle(equations)
    question = Question(tuple(equations), target=chain_vars[-1])

    depth = depth_of(question)
    assert depth == cfg.depth, f"generator produced depth {depth}, wanted {cfg.depth}"
    return Instance(
        id=instance_id if instance_id is not None else f"q{cfg.seed:016x}",
        question=question,
        answer=oracle_answer(question),
        depth=depth,
        gold=gold_traces(question),
    )


def gen_split(
    seed: int,
    depths: list[int],
    per_depth: int,
    distractors: int | None = None,
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET,
) -> list[Instance]:
    """`per_depth` instances for each listed depth, depth-major order.

    Default regimes: train is depths 1-5 x 1000, test is depths 1-12 x 200.
    """
    if per_depth < 1:
        raise ConfigError(f"per_depth must be >= 1, got {per_depth}")
    out: list[Instance] = []
    for depth in depths:
        for index in range(per_depth):
            child = derive_seed(seed, _SPLIT_BRANCH, depth, index)
            cfg = GenConfig(seed=child, depth=depth, distractors=distractors, alphabet=alphabet)
            out.append(gen_instance(cfg, instance_id=f"d{depth:02d}-{index:04d}-{child:016x}"))
    return out


def gen_pretraining(
    seed: int,
    count: int = 10000,
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET,
) -> list[Instance]:
    """Single-depth warm-up instances, half `X=n, X?`, half `X=a+b, X?`."""
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    out: list[Instance] = []
    for index in range(count):
        child = derive_seed(seed, _PRETRAIN_BRANCH, index)
        rng = SplitMix64(child)
        name = rng.choice(alphabet)
        if index % 2 == 0:
            rhs = Direct(Num(rng.randint(0, MAX_NUMERAL)))
        else:
            rhs = Add(Num(rng.randint(0, MAX_NUMERAL)), Num(rng.randint(0, MAX_NUMERAL)))
        question = Question((Equation(name, rhs),), target=name)
        out.append(
            Instance(
                id=f"pre-{index:05d}-{child:016x}",
                question=question,
                answer=oracle_answer(question),
                depth=1,
                gold=gold_traces(question),
            )
        )
    return out
