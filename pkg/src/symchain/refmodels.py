"""Built-in reference models: a perfect responder and a fault injector.

The perfect model is stateless per request: it parses the question (and any
partial chain) back out of the request input, derives the gold trace for its
configured chaining strategy, and answers with exactly the next unit — the
full trace, the next line, or the next token.  Parsed questions and their
accretion tables are cached by question text.

The faulty wrapper serves the same way but from a perturbed trace.  A copy
fault corrupts one numeral in an equation and lets the error propagate
consistently (the model "misread" the context); a hasty fault drops an
equation's copy line and substitutes a fabricated value instead.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_left
from dataclasses import dataclass

from .chaining import ChainingStrategy, expand_equation, trace_for
from .errors import ProtocolError, SymchainError
from .lang import (
    MAX_NUMERAL,
    MODULUS,
    Add,
    Direct,
    Equation,
    Num,
    Question,
    TokenKind,
    Trace,
    Var,
    parse_question,
    render,
    tokenize,
)
from .ports import ModelRequest, ModelResponse
from .rendering import CHAIN_SEP, OutputStrategy
from .rng import SplitMix64
from .semantics import necessary_set


@dataclass(frozen=True)
class FaultConfig:
    p_copy: float = 0.0
    p_hasty: float = 0.0
    p_skip_answer: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        for name in ("p_copy", "p_hasty", "p_skip_answer"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise SymchainError(f"{name} must be in [0, 1], got {p}")


class _CachedTrace:
    def __init__(self, trace: Trace):
        self.trace_text = render(trace)
        self.line_texts = [render(line) for line in trace.lines]
        tokens = tokenize(self.trace_text)
        self.token_texts = [tok.text for tok in tokens]
        # Partial accretion strings are prefixes of the full text; their
        # lengths are strictly increasing, so (length, prefix) identifies how
        # many tokens a context already contains.
        self.prefix_lens: list[int] = []
        length = 0
        after_comma = False
        for tok in tokens:
            length += len(tok.text) + (1 if after_comma else 0)
            self.prefix_lens.append(length)
            after_comma = tok.kind is TokenKind.COMMA

    def tokens_consumed(self, partial: str) -> int | None:
        """How many trace tokens `partial` covers; None if it is not a prefix."""
        if partial == "":
            return 0
        at = bisect_left(self.prefix_lens, len(partial))
        if (
            at < len(self.prefix_lens)
            and self.prefix_lens[at] == len(partial)
            and self.trace_text.startswith(partial)
        ):
            return at + 1
        return None


class _TraceServer:
    """Serves successive units of one trace per question; subclasses choose
    the trace."""

    def __init__(self, chaining: ChainingStrategy):
        self.chaining = chaining
        self._cache: dict[str, _CachedTrace] = {}

    def trace_of(self, q: Question) -> Trace:
        raise NotImplementedError

    def _entry(self, question_text: str) -> _CachedTrace:
        entry = self._cache.get(question_text)
        if entry is None:
            try:
                question = parse_question(question_text)
            except SymchainError as exc:
                raise ProtocolError(f"cannot decode question from context: {exc}") from exc
            entry = _CachedTrace(self.trace_of(question))
            self._cache[question_text] = entry
        return entry

    def request(self, req: ModelRequest) -> ModelResponse:
        sep = req.input.find(CHAIN_SEP)
        if sep < 0:
            question_text, partial = req.input, ""
        else:
            question_text, partial = req.input[:sep], req.input[sep + len(CHAIN_SEP):]
        entry = self._entry(question_text)

        if req.mode is OutputStrategy.ALL_AT_ONCE:
            return ModelResponse(req.id, entry.trace_text)
        if req.mode is OutputStrategy.STEP_BY_STEP:
            done = 0 if not partial else partial.count(", ") + 1
            if done >= len(entry.line_texts):
                raise ProtocolError("chain already complete")
            return ModelResponse(req.id, entry.line_texts[done])
        if req.mode is OutputStrategy.TOKEN_BY_TOKEN:
            k = entry.tokens_consumed(partial)
            if k is None:
                raise ProtocolError("context is not a prefix of this chain")
            if k >= len(entry.token_texts):
                raise ProtocolError("chain already complete")
            return ModelResponse(req.id, entry.token_texts[k])
        raise ProtocolError(f"unknown mode {req.mode!r}")

    def close(self) -> None:
        pass


class PerfectModel(_TraceServer):
    def trace_of(self, q: Question) -> Trace:
        return trace_for(q, self.chaining)


def perfect_model(chaining: ChainingStrategy) -> PerfectModel:
    return PerfectModel(chaining)


# --------------------------------------------------------- fault injection ---

def _question_rng(cfg: FaultConfig, q: Question) -> SplitMix64:
    digest = hashlib.sha256(render(q).encode("utf-8")).digest()
    return SplitMix64(cfg.seed ^ int.from_bytes(digest[:8], "big"))


def _corrupt_numeral(eq: Equation, rng: SplitMix64) -> Equation:
    """Replace one numeral operand with a different uniform numeral."""
    if isinstance(eq.rhs, Direct):
        ops = [eq.rhs.operand]
    else:
        ops = [eq.rhs.left, eq.rhs.right]
    spots = [i for i, op in enumerate(ops) if isinstance(op, Num)]
    if not spots:
        return eq
    spot = spots[rng.randrange(len(spots))] if len(spots) > 1 else spots[0]
    old = ops[spot].value
    new = rng.randrange(MAX_NUMERAL)  # [0, 99) then shift past the old value
    if new >= old:
        new += 1
    ops[spot] = Num(new)
    rhs = Direct(ops[0]) if isinstance(eq.rhs, Direct) else Add(ops[0], ops[1])
    return Equation(eq.lhs, rhs)


class FaultyModel(_TraceServer):
    def __init__(self, base: _TraceServer, cfg: FaultConfig):
        cfg.validate()
        super().__init__(base.chaining)
        self.base = base
        self.cfg = cfg

    def trace_of(self, q: Question) -> Trace:
        rng = _question_rng(self.cfg, q)
        block_order = self._block_order(q)
        believed: dict[str, int] = {}
        lines: list[Equation] = []

        plans: dict[str, tuple[str, Equation | None]] = {}
        for eq in block_order:
            has_var_add = isinstance(eq.rhs, Add) and any(
                isinstance(op, Var) for op in (eq.rhs.left, eq.rhs.right)
            )
            if rng.chance(self.cfg.p_copy):
                plans[eq.lhs] = ("copy", _corrupt_numeral(eq, rng))
            elif has_var_add and rng.chance(self.cfg.p_hasty):
                plans[eq.lhs] = ("hasty", None)
            else:
                plans[eq.lhs] = ("normal", None)

        if self.chaining is ChainingStrategy.NONE:
            # Faults still flow into the direct answer: derive believed values
            # silently, emit only the claim.
            for eq in block_order:
                self._block(eq, plans[eq.lhs], believed, rng)
            lines = [Equation(q.target, Direct(Num(believed[q.target])))]
        elif self.chaining is ChainingStrategy.BACKWARD:
            lines.extend(self._backward_lines(block_order, plans, believed, rng))
        else:
            for eq in block_order:
                lines.extend(self._block(eq, plans[eq.lhs], believed, rng))

        if lines and rng.chance(self.cfg.p_skip_answer):
            lines = lines[:-1]
        return Trace(tuple(lines))

    def _block_order(self, q: Question) -> list[Equation]:
        by_lhs = {eq.lhs: eq for eq in q.equations}
        if self.chaining in (ChainingStrategy.NONE, ChainingStrategy.BACKWARD):
            order = list(necessary_set(q))
        else:
            gold = self.base.trace_of(q)
            seen: list[Equation] = []
            for line in gold.lines:
                eq = by_lhs[line.lhs]
                if eq not in seen:
                    seen.append(eq)
            order = seen
        return order

    def _block(self, eq: Equation, plan, believed: dict[str, int], rng: SplitMix64) -> list[Equation]:
        kind, corrupted = plan
        if kind == "copy":
            out = expand_equation(corrupted, believed)
        elif kind == "hasty":
            out = self._hasty_lines(eq, believed, rng)
        else:
            out = expand_equation(eq, believed)
        final = out[-1]
        if isinstance(final.rhs, Direct) and isinstance(final.rhs.operand, Num):
            believed[eq.lhs] = final.rhs.operand.value
        return out

    def _hasty_lines(self, eq: Equation, believed: dict[str, int], rng: SplitMix64) -> list[Equation]:
        """Skip the copy; substitute a fabricated value for the variable."""
        left, right = eq.rhs.left, eq.rhs.right
        fake = Num(self._perturbed(believed, left if isinstance(left, Var) else right, rng))
        if isinstance(left, Var):
            left = fake
        else:
            right = fake
        if isinstance(right, Var):
            right = Num(believed[right.name])
        sub = Equation(eq.lhs, Add(left, right))
        result = Equation(eq.lhs, Direct(Num((left.value + right.value) % MODULUS)))
        return [sub, result]

    def _perturbed(self, believed: dict[str, int], var: Var, rng: SplitMix64) -> int:
        true = believed[var.name]
        fake = rng.randrange(MAX_NUMERAL)
        return fake + 1 if fake >= true else fake

    def _backward_lines(self, block_order, plans, believed, rng) -> list[Equation]:
        # block_order is base-first here; copies render target-first.
        copies: list[Equation] = []
        for eq in reversed(block_order):
            kind, corrupted = plans[eq.lhs]
            if kind == "copy":
                copies.append(corrupted)
            elif kind == "normal":
                copies.append(eq)
            # hasty: the copy is skipped entirely
        solve: list[Equation] = []
        for eq in block_order:
            kind, corrupted = plans[eq.lhs]
            source = corrupted if kind == "copy" else eq
            if kind == "hasty":
                block = self._hasty_lines(eq, believed, rng)
            else:
                block = expand_equation(source, believed)[1:]
            if block:
                final = block[-1]
            else:
                final = source  # direct assignment: the copy is the value line
            if isinstance(final.rhs, Direct) and isinstance(final.rhs.operand, Num):
                believed[eq.lhs] = final.rhs.operand.value
            solve.extend(block)
        return copies + solve


def faulty_model(base: _TraceServer, cfg: FaultConfig) -> FaultyModel:
    return FaultyModel(base, cfg)
