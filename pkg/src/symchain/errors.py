"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class SymchainError(Exception):
    """Base class for all toolkit errors."""


class LexError(SymchainError):
    """Input contains a character outside the surface language."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ParseError(SymchainError):
    """Input is lexically fine but does not match the grammar."""

    def __init__(self, message: str, position: int, expected: str | None = None):
        detail = f"{message} (at position {position}"
        if expected:
            detail += f", expected {expected}"
        detail += ")"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class SemanticError(SymchainError):
    """Structurally valid question that violates a well-formedness rule
    (duplicate definition, undefined reference, missing target equation)."""


class CycleError(SymchainError):
    """Variable references form a cycle; the question cannot be evaluated."""


class UnsolvableError(SymchainError):
    """The target variable has no derivable value."""


class ConfigError(SymchainError):
    """Generation or run configuration is invalid."""


class SchemaError(SymchainError):
    """A dataset/report file violates its schema."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        detail = message
        if line is not None:
            detail += f" (line {line}"
            if field:
                detail += f", field {field!r}"
            detail += ")"
        elif field:
            detail += f" (field {field!r})"
        super().__init__(detail)
        self.line = line
        self.field = field


class TransportError(SymchainError):
    """The model channel itself failed (process died, bad frame, connection
    refused). Distinct from a model answering incorrectly."""


class ProtocolError(SymchainError):
    """The model responded over a working channel but violated the
    interaction contract (multi-line step, non-token reply, bad context)."""
