"""Gold-trace engines: three chaining strategies plus the direct-answer baseline.

Every engine shares one expansion rule per equation: a copy line (the
equation verbatim), one substitution line per variable operand (leftmost
first, replaced by its solved value), and, when the right-hand side is an
addition, a final result line reduced mod 100.  A direct assignment expands
to its copy line alone.
"""

from __future__ import annotations

import enum

from .lang import MODULUS, Add, Direct, Equation, Line, Num, Question, Trace, Var
from .semantics import Valuation, answer, fixpoint_eval, necessary_set


class ChainingStrategy(enum.Enum):
    SHORTEST = "shortest"
    EXHAUSTIVE = "exhaustive"
    BACKWARD = "backward"
    NONE = "none"


def expand_equation(eq: Equation, vals: Valuation) -> list[Line]:
    lines: list[Line] = [eq]
    rhs = eq.rhs
    if isinstance(rhs, Direct):
        if isinstance(rhs.operand, Var):
            lines.append(Equation(eq.lhs, Direct(Num(vals[rhs.operand.name]))))
        return lines
    left, right = rhs.left, rhs.right
    if isinstance(left, Var):
        left = Num(vals[left.name])
        lines.append(Equation(eq.lhs, Add(left, right)))
    if isinstance(right, Var):
        right = Num(vals[right.name])
        lines.append(Equation(eq.lhs, Add(left, right)))
    lines.append(Equation(eq.lhs, Direct(Num((left.value + right.value) % MODULUS))))
    return lines


def shortest_trace(q: Question) -> Trace:
    """Expand exactly the necessary equations, base-first; nothing else."""
    vals = fixpoint_eval(q)
    lines: list[Line] = []
    for eq in necessary_set(q):
        lines.extend(expand_equation(eq, vals))
    return Trace(tuple(lines))


def exhaustive_trace(q: Question) -> Trace:
    """Greedy left-to-right solving until the target's value appears.

    Each step rescans from the leftmost equation and expands the first
    unsolved one whose operands are all known, so distractors sitting left of
    the live chain do get solved, while ones that only become relevant after
    the target is reached do not.
    """
    vals = fixpoint_eval(q)
    solved: set[str] = set()
    lines: list[Line] = []
    while True:
        for eq in q.equations:
            if eq.lhs in solved:
                continue
            if all(name in solved for name in eq.rhs_vars()):
                lines.extend(expand_equation(eq, vals))
                solved.add(eq.lhs)
                if eq.lhs == q.target:
                    return Trace(tuple(lines))
                break
        else:
            # Nothing solvable is left and the target never appeared.
            raise AssertionError("exhaustive scan stuck; question was not pre-validated")


def backward_trace(q: Question) -> Trace:
    """Copy lines from the target down to a known value, then solve upward.

    Phase 1 walks the dependency chain target-first, emitting each equation
    verbatim and stopping at the first one with no variable operand.  Phase 2
    replays the walk bottom-up, emitting only substitution and result lines
    (the copies are already on the page).
    """
    vals = fixpoint_eval(q)
    by_lhs = {eq.lhs: eq for eq in q.equations}
    visited: set[str] = set()
    walk: list[Equation] = []

    def visit(name: str) -> None:
        if name in visited:
            return
        visited.add(name)
        eq = by_lhs[name]
        walk.append(eq)
        for dep in eq.rhs_vars():
            visit(dep)

    visit(q.target)
    lines: list[Line] = list(walk)
    for eq in reversed(walk):
        lines.extend(expand_equation(eq, vals)[1:])
    return Trace(tuple(lines))


def none_trace(q: Question) -> Trace:
    """The bare answer line, nothing else."""
    return Trace((Equation(q.target, Direct(Num(answer(q)))),))


_ENGINES = {
    ChainingStrategy.SHORTEST: shortest_trace,
    ChainingStrategy.EXHAUSTIVE: exhaustive_trace,
    ChainingStrategy.BACKWARD: backward_trace,
    ChainingStrategy.NONE: none_trace,
}


def trace_for(q: Question, strategy: ChainingStrategy) -> Trace:
    return _ENGINES[strategy](q)


def gold_traces(q: Question) -> dict[ChainingStrategy, Trace]:
    return {strategy: engine(q) for strategy, engine in _ENGINES.items()}
