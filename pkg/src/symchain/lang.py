"""Surface language for equation questions and reasoning chains.

The language is deliberately tiny: uppercase variable names, numerals 0-99,
`=`, `+`, `,` and a trailing `X?` marking the question target.  This module
owns the abstract syntax, the lexer, the parsers, and the one canonical
printer every other component compares strings against.

Canonical form: items joined by ``", "``, no whitespace inside an equation,
numerals printed without leading zeros.  ``parse(render(x)) == x`` for every
well-formed value.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import LexError, ParseError, SemanticError

MODULUS = 100
MAX_NUMERAL = MODULUS - 1

ITEM_SEP = ", "

_VAR_RE = re.compile(r"[A-Z]+\Z")


# ---------------------------------------------------------------- syntax ---

@dataclass(frozen=True)
class Num:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= MAX_NUMERAL:
            raise ValueError(f"numeral out of range [0, {MAX_NUMERAL}]: {self.value}")


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not _VAR_RE.match(self.name):
            raise ValueError(f"variable name must match [A-Z]+: {self.name!r}")


Operand = Num | Var


@dataclass(frozen=True)
class Direct:
    operand: Operand


@dataclass(frozen=True)
class Add:
    left: Operand
    right: Operand


Rhs = Direct | Add


@dataclass(frozen=True)
class Equation:
    """One `LHS = rhs` item.  Also the shape of a single reasoning line."""

    lhs: str
    rhs: Rhs

    def __post_init__(self):
        if not _VAR_RE.match(self.lhs):
            raise ValueError(f"equation lhs must match [A-Z]+: {self.lhs!r}")

    def rhs_vars(self) -> tuple[str, ...]:
        return tuple(op.name for op in rhs_operands(self.rhs) if isinstance(op, Var))


# A reasoning line is syntactically an equation; roles (copy / substitution /
# result) are judged downstream, never stored on the value.
Line = Equation


@dataclass(frozen=True)
class Trace:
    lines: tuple[Line, ...]


@dataclass(frozen=True)
class Question:
    equations: tuple[Equation, ...]
    target: str


def rhs_operands(rhs: Rhs) -> tuple[Operand, ...]:
    if isinstance(rhs, Direct):
        return (rhs.operand,)
    return (rhs.left, rhs.right)


# --------------------------------------------------------------- printer ---

def render_operand(op: Operand) -> str:
    return str(op.value) if isinstance(op, Num) else op.name


def render_rhs(rhs: Rhs) -> str:
    if isinstance(rhs, Direct):
        return render_operand(rhs.operand)
    return f"{render_operand(rhs.left)}+{render_operand(rhs.right)}"


def render(obj: Question | Trace | Equation) -> str:
    """Canonical rendering of a question, trace, or single line."""
    if isinstance(obj, Equation):
        return f"{obj.lhs}={render_rhs(obj.rhs)}"
    if isinstance(obj, Trace):
        return ITEM_SEP.join(render(line) for line in obj.lines)
    if isinstance(obj, Question):
        items = [render(eq) for eq in obj.equations]
        items.append(f"{obj.target}?")
        return ITEM_SEP.join(items)
    raise TypeError(f"cannot render {type(obj).__name__}")


# ----------------------------------------------------------------- lexer ---

class TokenKind(enum.Enum):
    VAR = "VAR"
    EQUALS = "EQUALS"
    PLUS = "PLUS"
    DIGIT = "DIGIT"
    COMMA = "COMMA"
    QMARK = "QMARK"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    pos: int = 0


def tokenize(text: str) -> list[Token]:
    """Lex into VAR/EQUALS/PLUS/DIGIT/COMMA/QMARK tokens.

    Multi-digit numerals emit one DIGIT token per character.  Whitespace is
    skipped; any other character raises LexError.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif "A" <= c <= "Z":
            j = i
            while j < n and "A" <= text[j] <= "Z":
                j += 1
            tokens.append(Token(TokenKind.VAR, text[i:j], i))
            i = j
        elif c.isdigit():
            tokens.append(Token(TokenKind.DIGIT, c, i))
            i += 1
        elif c == "=":
            tokens.append(Token(TokenKind.EQUALS, c, i))
            i += 1
        elif c == "+":
            tokens.append(Token(TokenKind.PLUS, c, i))
            i += 1
        elif c == ",":
            tokens.append(Token(TokenKind.COMMA, c, i))
            i += 1
        elif c == "?":
            tokens.append(Token(TokenKind.QMARK, c, i))
            i += 1
        else:
            raise LexError(f"unexpected character {c!r}", i)
    return tokens


def detokenize(tokens: list[Token]) -> str:
    """Rebuild the canonical string: a space follows every comma, nothing else."""
    parts: list[str] = []
    for tok in tokens:
        parts.append(tok.text)
        if tok.kind is TokenKind.COMMA:
            parts.append(" ")
    return "".join(parts).rstrip()


# ---------------------------------------------------------------- parser ---

class _Cursor:
    def __init__(self, tokens: list[Token], text_len: int):
        self.tokens = tokens
        self.i = 0
        self.end = text_len

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def pos(self) -> int:
        tok = self.peek()
        return tok.pos if tok is not None else self.end

    def expect(self, kind: TokenKind) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end, expected=kind.value)
        if tok.kind is not kind:
            raise ParseError(f"unexpected {tok.text!r}", tok.pos, expected=kind.value)
        self.i += 1
        return tok

    def at(self, kind: TokenKind) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is kind


def _parse_numeral(cur: _Cursor) -> Num:
    start = cur.expect(TokenKind.DIGIT)
    digits = start.text
    while cur.at(TokenKind.DIGIT):
        digits += cur.expect(TokenKind.DIGIT).text
        if len(digits) > 2:
            raise ParseError(f"numeral {digits!r} exceeds {MAX_NUMERAL}", start.pos)
    return Num(int(digits))


def _parse_operand(cur: _Cursor) -> Operand:
    if cur.at(TokenKind.VAR):
        return Var(cur.expect(TokenKind.VAR).text)
    if cur.at(TokenKind.DIGIT):
        return _parse_numeral(cur)
    raise ParseError("expected a variable or numeral", cur.pos(), expected="VAR or DIGIT")


def _parse_equation(cur: _Cursor) -> Equation:
    lhs = cur.expect(TokenKind.VAR)
    cur.expect(TokenKind.EQUALS)
    first = _parse_operand(cur)
    if cur.at(TokenKind.PLUS):
        cur.expect(TokenKind.PLUS)
        second = _parse_operand(cur)
        return Equation(lhs.text, Add(first, second))
    return Equation(lhs.text, Direct(first))


def parse_line(text: str) -> Line:
    """Parse a single equation-shaped reasoning line.

    Tolerates surrounding whitespace; rejects anything beyond one line
    (a comma means the input holds several lines).
    """
    cur = _Cursor(tokenize(text), len(text))
    line = _parse_equation(cur)
    tok = cur.peek()
    if tok is not None:
        if tok.kind is TokenKind.COMMA:
            raise ParseError("expected a single line, found several", tok.pos)
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return line


def parse_trace(text: str) -> Trace:
    """Parse a comma-separated sequence of reasoning lines."""
    cur = _Cursor(tokenize(text), len(text))
    lines = [_parse_equation(cur)]
    while cur.at(TokenKind.COMMA):
        cur.expect(TokenKind.COMMA)
        lines.append(_parse_equation(cur))
    tok = cur.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return Trace(tuple(lines))


def parse_question(text: str) -> Question:
    """Parse `eq, eq, ..., X?` and check well-formedness.

    Raises ParseError on grammar violations and SemanticError when a
    variable is defined twice, a reference is undefined, or the target has
    no defining equation.
    """
    cur = _Cursor(tokenize(text), len(text))
    equations: list[Equation] = []
    target: str | None = None
    while True:
        nxt = cur.peek(1)
        if cur.at(TokenKind.VAR) and nxt is not None and nxt.kind is TokenKind.QMARK:
            target = cur.expect(TokenKind.VAR).text
            cur.expect(TokenKind.QMARK)
            break
        equations.append(_parse_equation(cur))
        cur.expect(TokenKind.COMMA)
    tok = cur.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    if not equations:
        raise ParseError("a question needs at least one equation", 0)

    defined: set[str] = set()
    for eq in equations:
        if eq.lhs in defined:
            raise SemanticError(f"variable {eq.lhs} is defined more than once")
        defined.add(eq.lhs)
    for eq in equations:
        for name in eq.rhs_vars():
            if name not in defined:
                raise SemanticError(f"variable {name} is referenced but never defined")
    assert target is not None
    if target not in defined:
        raise SemanticError(f"target {target} has no defining equation")
    return Question(tuple(equations), target)
