"""Mathematical chain checking: order-insensitive correctness and error naming.

A predicted chain is *chain-correct* when three things hold at once: every
line is sound (a verbatim copy of a context equation, a single substitution
of an established value into a previously emitted line, a correct mod-100
result of a previously emitted numeral-only line, or a bare value claim that
matches the oracle), the canonical line multiset equals gold's, and the final
answer is right.  Only dependency order matters; any reordering that keeps
prerequisites before their uses is accepted.

Line identity uses the canonical rendering with operand order preserved: no
commutative normalisation, because copying fidelity is itself under test.

`classify` names what went wrong.  Each error event gets its most specific
class: an incorrect copy later redone correctly is "ignoring the incorrect
step", one followed by the numerically correct next step is a "correct
assignment", and only an incorrect copy whose error propagates is a plain
"copying error".  A substitution with no prerequisite copy and a fabricated
value is a "hasty assignment".  Extra derivations outside the gold line set
that leave the answer intact are "non-affecting".  Malformed / wrong-answer /
missing-steps cover outputs the named taxonomy cannot.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

from .chaining import expand_equation
from .errors import ParseError, SemanticError, LexError
from .lang import (
    MODULUS,
    Add,
    Direct,
    Equation,
    Line,
    Num,
    Question,
    Trace,
    Var,
    parse_line,
    render,
)
from .semantics import fixpoint_eval, necessary_set


class ErrorClass(enum.Enum):
    COPYING_ERROR = "copying_error"
    HASTY_ASSIGNMENT = "hasty_assignment"
    IGNORING_INCORRECT_STEP = "ignoring_incorrect_step"
    CORRECT_ASSIGNMENT = "correct_assignment"
    NON_AFFECTING_ERROR = "non_affecting_error"
    MALFORMED = "malformed"
    WRONG_ANSWER = "wrong_answer"
    MISSING_STEPS = "missing_steps"


# Single-label reporting picks the first matching class in this order.
LABEL_PRIORITY = (
    ErrorClass.COPYING_ERROR,
    ErrorClass.HASTY_ASSIGNMENT,
    ErrorClass.IGNORING_INCORRECT_STEP,
    ErrorClass.CORRECT_ASSIGNMENT,
    ErrorClass.NON_AFFECTING_ERROR,
    ErrorClass.MALFORMED,
    ErrorClass.WRONG_ANSWER,
    ErrorClass.MISSING_STEPS,
)


@dataclass(frozen=True)
class Verdict:
    answer_correct: bool
    chain_correct: bool
    errors: tuple[ErrorClass, ...]
    first_bad_line: int | None  # 0-based index into the prediction's lines

    @property
    def label(self) -> str | None:
        """Single-label view of `errors`, by fixed priority."""
        for cls in LABEL_PRIORITY:
            if cls in self.errors:
                return cls.value
        return None


@dataclass(frozen=True)
class PredictedLine:
    text: str
    line: Line | None  # None: the text does not parse as one line


Prediction = Union[Trace, str, Sequence[PredictedLine]]


def coerce_prediction(predicted: Prediction) -> list[PredictedLine]:
    """Normalise raw model text / traces into judged-ready lines.

    Text splits on commas (whitespace-tolerant); pieces that fail to parse
    stay in the list as malformed entries so they can be scored.
    """
    if isinstance(predicted, Trace):
        return [PredictedLine(render(line), line) for line in predicted.lines]
    if isinstance(predicted, str):
        if not predicted.strip():
            return []
        out = []
        for piece in predicted.split(","):
            piece = piece.strip()
            try:
                out.append(PredictedLine(piece, parse_line(piece)))
            except (ParseError, LexError, SemanticError, ValueError):
                out.append(PredictedLine(piece, None))
        return out
    return list(predicted)


# ------------------------------------------------------------- soundness ---

@dataclass
class _LineJudgment:
    sound: bool
    role: str  # copy | substitution | result | value | malformed | unsound


def _operands(rhs) -> tuple:
    return (rhs.operand,) if isinstance(rhs, Direct) else (rhs.left, rhs.right)


def _numeral_only(rhs) -> bool:
    return all(isinstance(op, Num) for op in _operands(rhs))


def _is_value_line(line: Line) -> bool:
    return isinstance(line.rhs, Direct) and isinstance(line.rhs.operand, Num)


def _single_substitution(prev: Line, line: Line, established: dict[str, set[int]]) -> bool:
    """True when `line` is `prev` with exactly one variable operand replaced
    by one of that variable's established values."""
    if prev.lhs != line.lhs or type(prev.rhs) is not type(line.rhs):
        return False
    pairs = list(zip(_operands(prev.rhs), _operands(line.rhs)))
    substituted = 0
    for old, new in pairs:
        if old == new:
            continue
        if (
            isinstance(old, Var)
            and isinstance(new, Num)
            and new.value in established.get(old.name, ())
        ):
            substituted += 1
        else:
            return False
    return substituted == 1


def _analyze(q: Question, plines: list[PredictedLine]) -> list[_LineJudgment]:
    oracle = fixpoint_eval(q)
    context = {render(eq) for eq in q.equations}
    established: dict[str, set[int]] = {}
    for eq in q.equations:
        if _is_value_line(eq):
            established.setdefault(eq.lhs, set()).add(eq.rhs.operand.value)

    judgments: list[_LineJudgment] = []
    prev_lines: list[Line] = []
    for pl in plines:
        if pl.line is None:
            judgments.append(_LineJudgment(False, "malformed"))
            continue
        line = pl.line
        judgment = _LineJudgment(False, "unsound")
        if render(line) in context:
            judgment = _LineJudgment(True, "copy")
        elif _is_value_line(line) and any(
            p.lhs == line.lhs
            and isinstance(p.rhs, Add)
            and _numeral_only(p.rhs)
            and (p.rhs.left.value + p.rhs.right.value) % MODULUS == line.rhs.operand.value
            for p in prev_lines
        ):
            judgment = _LineJudgment(True, "result")
        elif any(_single_substitution(p, line, established) for p in prev_lines):
            judgment = _LineJudgment(True, "substitution")
        elif _is_value_line(line) and oracle.get(line.lhs) == line.rhs.operand.value:
            # A bare, correct value claim; completeness is the multiset's job.
            judgment = _LineJudgment(True, "value")
        judgments.append(judgment)
        prev_lines.append(line)
        if _is_value_line(line):
            established.setdefault(line.lhs, set()).add(line.rhs.operand.value)
    return judgments


# ---------------------------------------------------------------- checks ---

def check_answer(q: Question, predicted: Prediction) -> bool:
    """True iff the last parseable line claims the oracle's target value."""
    plines = coerce_prediction(predicted)
    parsed = [pl.line for pl in plines if pl.line is not None]
    if not parsed:
        return False
    last = parsed[-1]
    return (
        last.lhs == q.target
        and _is_value_line(last)
        and last.rhs.operand.value == fixpoint_eval(q).get(q.target)
    )


def check_chain(q: Question, gold: Trace, predicted: Prediction) -> Verdict:
    plines = coerce_prediction(predicted)
    judgments = _analyze(q, plines)
    answer_ok = check_answer(q, plines)

    gold_ms = Counter(render(line) for line in gold.lines)
    pred_ms = Counter(render(pl.line) for pl in plines if pl.line is not None)
    malformed = (not plines) or any(pl.line is None for pl in plines)
    all_sound = not malformed and all(j.sound for j in judgments)
    chain_ok = all_sound and pred_ms == gold_ms and answer_ok

    errors: tuple[ErrorClass, ...] = ()
    if not chain_ok:
        errors = tuple(_classify(q, gold, plines, judgments, answer_ok, gold_ms, pred_ms))
    return Verdict(
        answer_correct=answer_ok,
        chain_correct=chain_ok,
        errors=errors,
        first_bad_line=_first_bad(plines, judgments, gold_ms, chain_ok),
    )


def classify(q: Question, gold: Trace, predicted: Prediction) -> list[ErrorClass]:
    return list(check_chain(q, gold, predicted).errors)


def _first_bad(plines, judgments, gold_ms, chain_ok) -> int | None:
    if chain_ok:
        return None
    for i, j in enumerate(judgments):
        if not j.sound:
            return i
    budget = Counter(gold_ms)
    for i, pl in enumerate(plines):
        key = render(pl.line) if pl.line is not None else None
        if key is None or budget[key] <= 0:
            return i
        budget[key] -= 1
    return None  # every line is sound and within gold; steps are missing


# ---------------------------------------------------------- error naming ---

def _correct_steps(ctx: Equation, oracle: dict[str, int]) -> list[Line]:
    """Substitution/result lines that correctly continue a copied equation."""
    if any(isinstance(op, Var) and op.name not in oracle for op in _operands(ctx.rhs)):
        return []
    return expand_equation(ctx, oracle)[1:]


def _classify(
    q: Question,
    gold: Trace,
    plines: list[PredictedLine],
    judgments: list[_LineJudgment],
    answer_ok: bool,
    gold_ms: Counter,
    pred_ms: Counter,
) -> list[ErrorClass]:
    classes: list[ErrorClass] = []
    if not plines or any(pl.line is None for pl in plines):
        classes.append(ErrorClass.MALFORMED)

    oracle = fixpoint_eval(q)
    ctx_by_lhs = {eq.lhs: eq for eq in q.equations}
    parsed = [(i, pl.line) for i, pl in enumerate(plines) if pl.line is not None]
    explained: set[int] = set()

    for pos, (i, line) in enumerate(parsed):
        if judgments[i].sound or i in explained:
            continue
        ctx = ctx_by_lhs.get(line.lhs)
        if ctx is None:
            continue
        steps = _correct_steps(ctx, oracle)
        has_var = any(isinstance(op, Var) for op in _operands(line.rhs))
        ctx_has_var = any(isinstance(op, Var) for op in _operands(ctx.rhs))
        copy_shaped = has_var or (not ctx_has_var and type(line.rhs) is type(ctx.rhs))

        if copy_shaped:
            if any(later == ctx for _, later in parsed[pos + 1 :]):
                classes.append(ErrorClass.IGNORING_INCORRECT_STEP)
            elif steps and pos + 1 < len(parsed) and parsed[pos + 1][1] == steps[0]:
                classes.append(ErrorClass.CORRECT_ASSIGNMENT)
                explained.add(parsed[pos + 1][0])
            else:
                classes.append(ErrorClass.COPYING_ERROR)
        elif isinstance(line.rhs, Add) and _numeral_only(line.rhs) and ctx_has_var:
            # Substitution-shaped with no variable left: hasty when the
            # prerequisite copy never appeared and the value is fabricated.
            copy_before = any(earlier == ctx for _, earlier in parsed[:pos])
            fabricated = not steps or line != steps[0]
            if not copy_before and fabricated:
                classes.append(ErrorClass.HASTY_ASSIGNMENT)

    # Chain judged wrong, answer intact, and the necessary-variable lines
    # match gold exactly: whatever went wrong lives outside the live chain.
    if answer_ok and _chain_equal_on_necessary(q, gold, plines):
        classes.append(ErrorClass.NON_AFFECTING_ERROR)

    if not classes:
        if not answer_ok:
            classes.append(ErrorClass.WRONG_ANSWER)
        elif gold_ms - pred_ms:
            classes.append(ErrorClass.MISSING_STEPS)
        else:
            classes.append(ErrorClass.NON_AFFECTING_ERROR)
    return classes


def _chain_equal_on_necessary(q: Question, gold: Trace, plines: list[PredictedLine]) -> bool:
    """True when prediction and gold agree exactly on necessary-variable lines."""
    necessary = {eq.lhs for eq in necessary_set(q)}
    gold_part = Counter(render(line) for line in gold.lines if line.lhs in necessary)
    pred_part = Counter(
        render(pl.line) for pl in plines if pl.line is not None and pl.line.lhs in necessary
    )
    return gold_part == pred_part
