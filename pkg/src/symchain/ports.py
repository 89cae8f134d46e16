"""Model channel abstraction: one request, one response, ids echoed back."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol

from .rendering import OutputStrategy


class StopHint(enum.Enum):
    FULL = "FULL"
    LINE = "LINE"
    TOKEN = "TOKEN"


STOP_HINT_FOR = {
    OutputStrategy.ALL_AT_ONCE: StopHint.FULL,
    OutputStrategy.STEP_BY_STEP: StopHint.LINE,
    OutputStrategy.TOKEN_BY_TOKEN: StopHint.TOKEN,
}


@dataclass(frozen=True)
class ModelRequest:
    id: str
    input: str
    mode: OutputStrategy
    stop_hint: StopHint


@dataclass(frozen=True)
class ModelResponse:
    id: str
    output: str


class ModelPort(Protocol):
    """Strict request-response channel; one in-flight request per session.

    Implementations raise TransportError when the channel itself fails and
    ProtocolError when the peer answers outside the contract.  A model being
    *wrong* is neither: wrong text comes back as a normal response.
    """

    def request(self, req: ModelRequest) -> ModelResponse: ...

    def close(self) -> None: ...
