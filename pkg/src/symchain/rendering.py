"""Supervision-pair rendering and the JSONL dataset formats.

Three output granularities share one accretion law: the model's context is
always `question + " ; " + partial-chain`, where the partial chain is the
canonical rendering of everything produced so far.  The ``" ; "`` separator
is not part of the grammar, so it can never collide with content.

Files store plain multi-digit numerals; digit-level views come from the
tokenizer, never from the files.
"""

from __future__ import annotations

import enum
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .chaining import ChainingStrategy
from .errors import SchemaError
from .generator import Instance
from .lang import Token, detokenize, parse_question, parse_trace, render, tokenize

CHAIN_SEP = " ; "


class OutputStrategy(enum.Enum):
    ALL_AT_ONCE = "all"
    STEP_BY_STEP = "step"
    TOKEN_BY_TOKEN = "token"


@dataclass(frozen=True)
class TrainingExample:
    input_text: str
    target_text: str
    instance_id: str
    step_index: int


def step_input(question_text: str, line_texts: list[str]) -> str:
    """Model context before emitting the line after `line_texts`."""
    return question_text + CHAIN_SEP + ", ".join(line_texts)


def token_input(question_text: str, tokens: list[Token]) -> str:
    """Model context before emitting the token after `tokens`."""
    return question_text + CHAIN_SEP + detokenize(tokens)


def render_all_at_once(inst: Instance, cs: ChainingStrategy) -> list[TrainingExample]:
    q_text = render(inst.question)
    return [TrainingExample(q_text, render(inst.gold[cs]), inst.id, 0)]


def render_step_by_step(inst: Instance, cs: ChainingStrategy) -> list[TrainingExample]:
    q_text = render(inst.question)
    line_texts = [render(line) for line in inst.gold[cs].lines]
    return [
        TrainingExample(step_input(q_text, line_texts[:k]), line_texts[k], inst.id, k)
        for k in range(len(line_texts))
    ]


def render_token_by_token(inst: Instance, cs: ChainingStrategy) -> list[TrainingExample]:
    q_text = render(inst.question)
    tokens = tokenize(render(inst.gold[cs]))
    return [
        TrainingExample(token_input(q_text, tokens[:k]), tokens[k].text, inst.id, k)
        for k in range(len(tokens))
    ]


_RENDERERS = {
    OutputStrategy.ALL_AT_ONCE: render_all_at_once,
    OutputStrategy.STEP_BY_STEP: render_step_by_step,
    OutputStrategy.TOKEN_BY_TOKEN: render_token_by_token,
}


def render_examples(inst: Instance, os_: OutputStrategy, cs: ChainingStrategy) -> list[TrainingExample]:
    return _RENDERERS[os_](inst, cs)


# ------------------------------------------------------------------ files ---

def _atomic_write_lines(path: str | Path, lines: Iterable[str]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def instance_to_obj(inst: Instance) -> dict:
    return {
        "id": inst.id,
        "depth": inst.depth,
        "question": render(inst.question),
        "answer": inst.answer,
        "gold": {cs.value: render(trace) for cs, trace in sorted(inst.gold.items(), key=lambda kv: kv[0].value)},
    }


def _require(obj: dict, field: str, kind: type, line: int):
    if field not in obj:
        raise SchemaError("missing required field", line=line, field=field)
    value = obj[field]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"expected {kind.__name__}", line=line, field=field)
    return value


def instance_from_obj(obj: dict, line: int = 0) -> Instance:
    id_ = _require(obj, "id", str, line)
    depth = _require(obj, "depth", int, line)
    q_text = _require(obj, "question", str, line)
    ans = _require(obj, "answer", int, line)
    gold_obj = _require(obj, "gold", dict, line)
    gold = {}
    for cs in ChainingStrategy:
        text = _require(gold_obj, cs.value, str, line)
        gold[cs] = parse_trace(text)
    return Instance(id=id_, question=parse_question(q_text), answer=ans, depth=depth, gold=gold)


def instances_to_jsonl(instances: Iterable[Instance]) -> str:
    return "".join(json.dumps(instance_to_obj(i), separators=(", ", ": ")) + "\n" for i in instances)


def write_instances(path: str | Path, instances: Iterable[Instance]) -> None:
    _atomic_write_lines(path, (json.dumps(instance_to_obj(i), separators=(", ", ": ")) for i in instances))


def read_instances(path: str | Path) -> list[Instance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            out.append(instance_from_obj(obj, line=lineno))
    return out


def example_to_obj(ex: TrainingExample, os_: OutputStrategy, cs: ChainingStrategy) -> dict:
    return {
        "instance_id": ex.instance_id,
        "output_strategy": os_.value,
        "chaining_strategy": cs.value,
        "step_index": ex.step_index,
        "input_text": ex.input_text,
        "target_text": ex.target_text,
    }


def example_from_obj(obj: dict, line: int = 0) -> tuple[TrainingExample, OutputStrategy, ChainingStrategy]:
    ex = TrainingExample(
        input_text=_require(obj, "input_text", str, line),
        target_text=_require(obj, "target_text", str, line),
        instance_id=_require(obj, "instance_id", str, line),
        step_index=_require(obj, "step_index", int, line),
    )
    try:
        os_ = OutputStrategy(_require(obj, "output_strategy", str, line))
        cs = ChainingStrategy(_require(obj, "chaining_strategy", str, line))
    except ValueError as exc:
        raise SchemaError(str(exc), line=line) from exc
    return ex, os_, cs


def write_examples(
    path: str | Path,
    examples: Iterable[tuple[TrainingExample, OutputStrategy, ChainingStrategy]],
) -> None:
    _atomic_write_lines(
        path,
        (json.dumps(example_to_obj(ex, os_, cs), separators=(", ", ": ")) for ex, os_, cs in examples),
    )


def read_examples(path: str | Path) -> list[tuple[TrainingExample, OutputStrategy, ChainingStrategy]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            out.append(example_from_obj(obj, line=lineno))
    return out
