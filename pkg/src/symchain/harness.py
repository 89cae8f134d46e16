"""Drive a model through the interaction protocols and aggregate reports.

The drivers own the accretion law: at every step the model's context equals
`render(question) + " ; " + partial`, where the partial chain is rebuilt with
the same helpers the dataset renderers use, so training-time inputs and
evaluation-time inputs can never drift apart.

Model wrongness is never a transport failure.  A response that violates the
protocol (several lines at once, a non-token reply, a structured error)
scores the instance malformed and moves on; only channel failures abort the
run, flagging the report incomplete.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .chaining import ChainingStrategy
from .errors import LexError, ParseError, ProtocolError, SemanticError, TransportError
from .generator import Instance, gen_split
from .lang import Direct, Num, Question, Token, TokenKind, detokenize, parse_line, render, tokenize
from .ports import STOP_HINT_FOR, ModelPort, ModelRequest
from .rendering import OutputStrategy, instances_to_jsonl, step_input, token_input
from .semantics import answer as oracle_answer
from .verifier import PredictedLine, Verdict, check_chain, coerce_prediction

STEP_CAP = 100
TOKEN_CAP = 500

_MALFORMED = object()  # sentinel: protocol broke, score what exists as malformed


@dataclass
class DriveResult:
    plines: list[PredictedLine]
    calls: int
    capped: bool


def _ask(port: ModelPort, req: ModelRequest) -> str | object:
    """One request; ProtocolError collapses to the malformed sentinel."""
    try:
        resp = port.request(req)
    except ProtocolError:
        return _MALFORMED
    if resp.id != req.id:
        raise TransportError(f"response id {resp.id!r} does not match request {req.id!r}")
    return resp.output


def _parse_single_line(text: str):
    try:
        return parse_line(text.strip())
    except (ParseError, LexError, SemanticError, ValueError):
        return None


def drive_all_at_once(port: ModelPort, q: Question, req_id: str = "r0") -> DriveResult:
    out = _ask(port, ModelRequest(req_id, render(q), OutputStrategy.ALL_AT_ONCE,
                                  STOP_HINT_FOR[OutputStrategy.ALL_AT_ONCE]))
    if out is _MALFORMED:
        return DriveResult([PredictedLine("", None)], 1, False)
    return DriveResult(coerce_prediction(out), 1, False)


def drive_step_by_step(
    port: ModelPort, q: Question, req_prefix: str = "r", max_steps: int = STEP_CAP
) -> DriveResult:
    q_text = render(q)
    plines: list[PredictedLine] = []
    line_texts: list[str] = []
    for k in range(max_steps):
        req = ModelRequest(f"{req_prefix}{k}", step_input(q_text, line_texts),
                           OutputStrategy.STEP_BY_STEP, STOP_HINT_FOR[OutputStrategy.STEP_BY_STEP])
        out = _ask(port, req)
        if out is _MALFORMED:
            plines.append(PredictedLine("", None))
            return DriveResult(plines, k + 1, False)
        text = out.strip()
        line = None if ("\n" in text or "," in text) else _parse_single_line(text)
        if line is None:
            # several lines at once, or not a line at all: off the rails
            plines.append(PredictedLine(out, None))
            return DriveResult(plines, k + 1, False)
        plines.append(PredictedLine(render(line), line))
        line_texts.append(render(line))
        if line.lhs == q.target and isinstance(line.rhs, Direct) and isinstance(line.rhs.operand, Num):
            return DriveResult(plines, k + 1, False)
    return DriveResult(plines, max_steps, True)


def drive_token_by_token(
    port: ModelPort,
    q: Question,
    req_prefix: str = "r",
    max_steps: int = TOKEN_CAP,
    chaining: ChainingStrategy | None = None,
) -> DriveResult:
    """Accrete one token per call; stop once the answer line is complete.

    A trailing segment like `Y=92` is ambiguous: it may be the final answer
    or the prefix of a longer line (`Y=92+0`).  The driver only treats it as
    the answer once the chain justifies it as complete: it matches a context
    assignment verbatim, a comma-completed numeral-only line for the target
    reduces to it, or (under no-chaining) it is the bare first claim.
    """
    q_text = render(q)
    target_value = oracle_answer(q)
    ctx_renders = {render(eq) for eq in q.equations}
    tokens: list[Token] = []
    completed: list[Line | None] = []  # parsed comma-completed segments
    for k in range(max_steps):
        req = ModelRequest(f"{req_prefix}{k}", token_input(q_text, tokens),
                           OutputStrategy.TOKEN_BY_TOKEN, STOP_HINT_FOR[OutputStrategy.TOKEN_BY_TOKEN])
        out = _ask(port, req)
        if out is _MALFORMED:
            return DriveResult(_finish_tokens(tokens, drop_partial=True, mark_malformed=True), k + 1, False)
        try:
            got = tokenize(out)
        except LexError:
            got = []
        if len(got) != 1:
            return DriveResult(_finish_tokens(tokens, drop_partial=True, mark_malformed=True), k + 1, False)
        token = got[0]
        if token.kind is TokenKind.COMMA:
            completed.append(_parse_single_line(detokenize(_trailing_segment(tokens))))
        tokens.append(token)
        if token.kind is not TokenKind.COMMA:
            segment = _parse_single_line(detokenize(_trailing_segment(tokens)))
            if segment is not None and _answer_complete(
                q, target_value, ctx_renders, completed, segment, chaining
            ):
                return DriveResult(_finish_tokens(tokens, drop_partial=False), k + 1, False)
    return DriveResult(_finish_tokens(tokens, drop_partial=True), max_steps, True)


def _answer_complete(
    q: Question,
    target_value: int,
    ctx_renders: set[str],
    completed: list[Line | None],
    segment: Line,
    chaining: ChainingStrategy | None,
) -> bool:
    if segment.lhs != q.target:
        return False
    if not (isinstance(segment.rhs, Direct) and isinstance(segment.rhs.operand, Num)):
        return False
    if segment.rhs.operand.value != target_value:
        return False
    if chaining is ChainingStrategy.NONE and not completed:
        return True
    if render(segment) in ctx_renders:
        return True
    return any(
        line is not None
        and line.lhs == q.target
        and not line.rhs_vars()
        and not isinstance(line.rhs, Direct)
        and (line.rhs.left.value + line.rhs.right.value) % 100 == target_value
        for line in completed
    )


def _trailing_segment(tokens: list[Token]) -> list[Token]:
    for i in range(len(tokens) - 1, -1, -1):
        if tokens[i].kind is TokenKind.COMMA:
            return tokens[i + 1 :]
    return list(tokens)


def _finish_tokens(tokens: list[Token], drop_partial: bool, mark_malformed: bool = False) -> list[PredictedLine]:
    segments: list[list[Token]] = [[]]
    for tok in tokens:
        if tok.kind is TokenKind.COMMA:
            segments.append([])
        else:
            segments[-1].append(tok)
    if drop_partial and segments and segments[-1]:
        segments.pop()
    plines: list[PredictedLine] = []
    for seg in segments:
        if not seg:
            continue
        text = detokenize(seg)
        plines.append(PredictedLine(text, _parse_single_line(text)))
    if mark_malformed:
        plines.append(PredictedLine("", None))
    return plines


def drive(port: ModelPort, q: Question, output: OutputStrategy, req_prefix: str,
          step_cap: int = STEP_CAP, token_cap: int = TOKEN_CAP,
          chaining: ChainingStrategy | None = None) -> DriveResult:
    if output is OutputStrategy.ALL_AT_ONCE:
        return drive_all_at_once(port, q, req_prefix + "0")
    if output is OutputStrategy.STEP_BY_STEP:
        return drive_step_by_step(port, q, req_prefix, step_cap)
    return drive_token_by_token(port, q, req_prefix, token_cap, chaining=chaining)


# -------------------------------------------------------------- evaluation ---

@dataclass
class InstanceOutcome:
    instance_id: str
    depth: int
    verdict: Verdict
    capped: bool
    calls: int
    chain_chars: int
    predicted_text: str


def score_instance(inst: Instance, chaining: ChainingStrategy, result: DriveResult) -> InstanceOutcome:
    verdict = check_chain(inst.question, inst.gold[chaining], result.plines)
    text = ", ".join(pl.text for pl in result.plines)
    return InstanceOutcome(
        instance_id=inst.id,
        depth=inst.depth,
        verdict=verdict,
        capped=result.capped,
        calls=result.calls,
        chain_chars=len(text),
        predicted_text=text,
    )


def evaluate_pair(
    port_factory: Callable[[], ModelPort],
    instances: Sequence[Instance],
    output: OutputStrategy,
    chaining: ChainingStrategy,
    step_cap: int = STEP_CAP,
    token_cap: int = TOKEN_CAP,
    jobs: int = 1,
) -> list[InstanceOutcome]:
    """Drive every instance under one output x chaining pair, in order.

    Requests within an instance are strictly sequential; with jobs > 1 the
    instances fan out across workers, each with its own port session.
    """

    def work(chunk: list[tuple[int, Instance]], sink: dict[int, InstanceOutcome]) -> None:
        port = port_factory()
        try:
            for idx, inst in chunk:
                result = drive(port, inst.question, output,
                               req_prefix=f"{inst.id}/{output.value}/",
                               step_cap=step_cap, token_cap=token_cap, chaining=chaining)
                sink[idx] = score_instance(inst, chaining, result)
        finally:
            port.close()

    indexed = list(enumerate(instances))
    results: dict[int, InstanceOutcome] = {}
    if jobs <= 1:
        work(indexed, results)
    else:
        chunks = [indexed[i::jobs] for i in range(jobs)]
        sinks: list[dict[int, InstanceOutcome]] = [{} for _ in chunks]
        errors: list[BaseException] = []

        def runner(chunk, sink):
            try:
                work(chunk, sink)
            except BaseException as exc:  # noqa: BLE001 - reraised below
                errors.append(exc)

        threads = [threading.Thread(target=runner, args=(c, s)) for c, s in zip(chunks, sinks)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]
        for sink in sinks:
            results.update(sink)
    return [results[i] for i in sorted(results)]


def aggregate(outcomes: Sequence[InstanceOutcome]) -> dict[int, dict]:
    """Per-depth counters; all merges are commutative."""
    per_depth: dict[int, dict] = {}
    for oc in outcomes:
        stats = per_depth.setdefault(
            oc.depth,
            {
                "n": 0,
                "chain_correct": 0,
                "answer_correct": 0,
                "errors": Counter(),
                "chain_length_hist": Counter(),
                "capped": 0,
                "max_calls": 0,
            },
        )
        stats["n"] += 1
        stats["chain_correct"] += int(oc.verdict.chain_correct)
        stats["answer_correct"] += int(oc.verdict.answer_correct)
        if oc.verdict.label is not None:
            stats["errors"][oc.verdict.label] += 1
        stats["chain_length_hist"][oc.chain_chars] += 1
        stats["capped"] += int(oc.capped)
        stats["max_calls"] = max(stats["max_calls"], oc.calls)
    return per_depth


# ------------------------------------------------------------------ report ---

@dataclass
class RunConfig:
    outputs: list[OutputStrategy]
    chainings: list[ChainingStrategy]
    depths: list[int]
    per_depth: int
    seeds: list[int]
    step_cap: int = STEP_CAP
    token_cap: int = TOKEN_CAP
    jobs: int = 1
    distractors: int | None = None


@dataclass
class Report:
    meta: dict
    pairs: dict[str, dict]

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "pairs": self.pairs}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        obj = json.loads(text)
        return cls(meta=obj["meta"], pairs=obj["pairs"])


def pair_key(output: OutputStrategy, chaining: ChainingStrategy) -> str:
    return f"{output.value}/{chaining.value}"


def dataset_hash(instances: Sequence[Instance]) -> str:
    return hashlib.sha256(instances_to_jsonl(instances).encode("utf-8")).hexdigest()


def run_evaluation(
    port_factory: Callable[[], ModelPort],
    cfg: RunConfig,
    dataset: list[Instance] | None = None,
) -> Report:
    """Evaluate every configured pair; means over seeds when several are given.

    A fixed dataset pins the instances for all seeds.  TransportError stops
    the run and flags the report incomplete rather than discarding partials.
    """
    datasets: list[tuple[int | None, list[Instance]]]
    if dataset is not None:
        datasets = [(None, dataset)]
    else:
        datasets = [
            (seed, gen_split(seed, cfg.depths, cfg.per_depth, distractors=cfg.distractors))
            for seed in cfg.seeds
        ]

    meta = {
        "tool": "symchain",
        "protocol": "symchain/1",
        "config": {
            "outputs": [o.value for o in cfg.outputs],
            "chainings": [c.value for c in cfg.chainings],
            "depths": cfg.depths,
            "per_depth": cfg.per_depth,
            "seeds": cfg.seeds,
            "step_cap": cfg.step_cap,
            "token_cap": cfg.token_cap,
            "distractors": cfg.distractors,
        },
        "dataset_hash": {str(seed): dataset_hash(insts) for seed, insts in datasets},
        "incomplete": False,
    }

    pairs: dict[str, dict] = {}
    try:
        for output in cfg.outputs:
            for chaining in cfg.chainings:
                merged: dict[str, dict] = {}
                for seed, instances in datasets:
                    outcomes = evaluate_pair(
                        port_factory, instances, output, chaining,
                        step_cap=cfg.step_cap, token_cap=cfg.token_cap, jobs=cfg.jobs,
                    )
                    _merge_seed(merged, seed, aggregate(outcomes))
                _finalize_pair(merged)
                pairs[pair_key(output, chaining)] = {"per_depth": merged}
    except TransportError as exc:
        meta["incomplete"] = True
        meta["transport_error"] = str(exc)
    return Report(meta=meta, pairs=pairs)


def _merge_seed(merged: dict[str, dict], seed: int | None, per_depth: dict[int, dict]) -> None:
    for depth, stats in per_depth.items():
        entry = merged.setdefault(
            str(depth),
            {
                "n": 0,
                "chain_correct": 0,
                "answer_correct": 0,
                "errors": {},
                "chain_length_hist": {},
                "capped": 0,
                "max_calls": 0,
                "per_seed": {},
            },
        )
        entry["n"] += stats["n"]
        entry["chain_correct"] += stats["chain_correct"]
        entry["answer_correct"] += stats["answer_correct"]
        for key, count in stats["errors"].items():
            entry["errors"][key] = entry["errors"].get(key, 0) + count
        for length, count in stats["chain_length_hist"].items():
            entry["chain_length_hist"][str(length)] = (
                entry["chain_length_hist"].get(str(length), 0) + count
            )
        entry["capped"] += stats["capped"]
        entry["max_calls"] = max(entry["max_calls"], stats["max_calls"])
        entry["per_seed"][str(seed)] = {
            "n": stats["n"],
            "chain_accuracy": stats["chain_correct"] / stats["n"],
            "answer_accuracy": stats["answer_correct"] / stats["n"],
        }


def _finalize_pair(merged: dict[str, dict]) -> None:
    for entry in merged.values():
        seeds = entry["per_seed"].values()
        entry["chain_accuracy"] = sum(s["chain_accuracy"] for s in seeds) / len(entry["per_seed"])
        entry["answer_accuracy"] = sum(s["answer_accuracy"] for s in seeds) / len(entry["per_seed"])
