"""Dependency analysis and the brute-force evaluation oracle.

`fixpoint_eval` resolves whatever it can, one pass at a time, until nothing
changes.  It never assumes a topological order exists, so it stays correct on
arbitrary parsed questions; ordering is only used by `necessary_set`, which
needs a base-first listing.
"""

from __future__ import annotations

from .errors import CycleError, UnsolvableError
from .lang import MODULUS, Add, Direct, Equation, Num, Question

Valuation = dict[str, int]


class DependencyGraph:
    """Variables as nodes; edge (user, used) when user's rhs mentions used."""

    def __init__(self, nodes: set[str], edges: set[tuple[str, str]]):
        self.nodes = nodes
        self.edges = edges

    def uses(self, name: str) -> set[str]:
        return {used for user, used in self.edges if user == name}


def build_graph(q: Question) -> DependencyGraph:
    nodes = {eq.lhs for eq in q.equations}
    edges = {(eq.lhs, used) for eq in q.equations for used in eq.rhs_vars()}
    _check_acyclic(q, edges)
    return DependencyGraph(nodes, edges)


def _check_acyclic(q: Question, edges: set[tuple[str, str]]) -> None:
    # Kahn-style elimination; leftovers mean a cycle.
    remaining = {eq.lhs: set(eq.rhs_vars()) for eq in q.equations}
    progress = True
    while progress:
        progress = False
        resolved = [name for name, deps in remaining.items() if not deps]
        for name in resolved:
            del remaining[name]
            for deps in remaining.values():
                deps.discard(name)
            progress = True
    if remaining:
        cyclic = ", ".join(sorted(remaining))
        raise CycleError(f"variable references form a cycle: {cyclic}")


def _eval_rhs(eq: Equation, vals: Valuation) -> int | None:
    resolved: list[int] = []
    for op in (eq.rhs.operand,) if isinstance(eq.rhs, Direct) else (eq.rhs.left, eq.rhs.right):
        if isinstance(op, Num):
            resolved.append(op.value)
        elif op.name in vals:
            resolved.append(vals[op.name])
        else:
            return None
    if isinstance(eq.rhs, Add):
        return (resolved[0] + resolved[1]) % MODULUS
    return resolved[0]


def fixpoint_eval(q: Question) -> Valuation:
    """Resolve every equation whose operands are known until quiescence.

    This is the ground-truth oracle for all trace engines.  Raises CycleError
    on cyclic references.
    """
    build_graph(q)
    vals: Valuation = {}
    changed = True
    while changed:
        changed = False
        for eq in q.equations:
            if eq.lhs in vals:
                continue
            value = _eval_rhs(eq, vals)
            if value is not None:
                vals[eq.lhs] = value
                changed = True
    return vals


def answer(q: Question) -> int:
    vals = fixpoint_eval(q)
    if q.target not in vals:
        raise UnsolvableError(f"target {q.target} has no derivable value")
    return vals[q.target]


def necessary_set(q: Question) -> list[Equation]:
    """Equations backward-reachable from the target, ordered base-first.

    Dependency order; ties broken by input position.  The complement of the
    returned set is exactly the distractor set.
    """
    if q.target not in fixpoint_eval(q):
        raise UnsolvableError(f"target {q.target} has no derivable value")
    by_lhs = {eq.lhs: eq for eq in q.equations}
    needed: set[str] = set()
    stack = [q.target]
    while stack:
        name = stack.pop()
        if name in needed:
            continue
        needed.add(name)
        stack.extend(by_lhs[name].rhs_vars())

    ordered: list[Equation] = []
    placed: set[str] = set()
    while len(ordered) < len(needed):
        for eq in q.equations:
            if eq.lhs in needed and eq.lhs not in placed and all(
                v in placed for v in eq.rhs_vars()
            ):
                ordered.append(eq)
                placed.add(eq.lhs)
                break
    return ordered


def depth_of(q: Question) -> int:
    """Number of equations needed to derive the target, its own included."""
    return len(necessary_set(q))


def distractors(q: Question) -> list[Equation]:
    needed = {eq.lhs for eq in necessary_set(q)}
    return [eq for eq in q.equations if eq.lhs not in needed]


__all__ = [
    "DependencyGraph",
    "Valuation",
    "answer",
    "build_graph",
    "depth_of",
    "distractors",
    "fixpoint_eval",
    "necessary_set",
]
