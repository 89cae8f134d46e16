"""Command-line entry point.

Depth ranges use inclusive `a..b` syntax (`--depths 1..5,8`).  Strategy names
are the lowercase enum values.  `SYMCHAIN_SEED` supplies the default seed.
Exit codes: 0 success, 1 usage, 2 data/schema, 3 transport.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .chaining import ChainingStrategy, trace_for
from .errors import SymchainError, TransportError
from .generator import gen_pretraining, gen_split
from .harness import Report, RunConfig, run_evaluation
from .lang import parse_question, render
from .refmodels import FaultConfig, faulty_model, perfect_model
from .rendering import (
    OutputStrategy,
    read_instances,
    render_examples,
    write_examples,
    write_instances,
)
from .report import accuracy_csv, accuracy_table, error_summary, lengths_csv
from .rng import derive_seed
from .verifier import check_chain
from .wire import HttpPort, SubprocessPort, serve_http, serve_stdio

_SEED_ENV = "SYMCHAIN_SEED"


def _default_seed() -> int:
    return int(os.environ.get(_SEED_ENV, "0"))


def parse_depths(text: str) -> list[int]:
    """`1..5,8` -> [1, 2, 3, 4, 5, 8]."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if ".." in piece:
            lo, hi = piece.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(piece))
    if not out or any(d < 1 for d in out):
        raise ValueError(f"bad depth list: {text!r}")
    return out


def parse_seeds(text: str | None, base_seed: int) -> list[int]:
    """`N` -> N seeds derived from the base; `a,b,c` -> those exact seeds."""
    if text is None:
        return [base_seed]
    if "," in text:
        return [int(p) for p in text.split(",")]
    count = int(text)
    if count < 1:
        raise ValueError("--seeds needs a positive count or an explicit list")
    return [derive_seed(base_seed, 3, i) for i in range(count)]


def _enum_list(cls, text: str):
    return [cls(piece.strip()) for piece in text.split(",")]


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    print(f"config: {json.dumps(resolved, default=str)}", file=sys.stderr)


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SymchainError(f"config file line is not key=value: {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


# ------------------------------------------------------------- subcommands ---

def cmd_gen(args) -> int:
    instances = gen_split(args.seed, args.depths, args.per_depth, distractors=args.distractors)
    write_instances(args.output, instances)
    _echo_config(args)
    print(f"wrote {len(instances)} instances to {args.output}", file=sys.stderr)
    return 0


def cmd_pretrain(args) -> int:
    instances = gen_pretraining(args.seed, args.count)
    write_instances(args.output, instances)
    _echo_config(args)
    print(f"wrote {len(instances)} instances to {args.output}", file=sys.stderr)
    return 0


def cmd_render(args) -> int:
    instances = read_instances(args.input)

    def rows():
        for inst in instances:
            for ex in render_examples(inst, args.output_strategy, args.chaining):
                yield ex, args.output_strategy, args.chaining

    write_examples(args.out, rows())
    _echo_config(args)
    return 0


def cmd_solve(args) -> int:
    q = parse_question(args.question)
    strategies = [args.chaining] if args.chaining else list(ChainingStrategy)
    for cs in strategies:
        text = render(trace_for(q, cs))
        if args.chaining:
            print(text)
        else:
            print(f"{cs.value}: {text}")
    return 0


def cmd_verify(args) -> int:
    gold_by_id = {inst.id: inst for inst in read_instances(args.gold)}
    sink = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    checked = correct = 0
    try:
        with open(args.predictions, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                obj = json.loads(raw)
                inst = gold_by_id.get(obj.get("instance_id"))
                if inst is None:
                    raise SymchainError(
                        f"prediction line {lineno}: unknown instance_id {obj.get('instance_id')!r}"
                    )
                verdict = check_chain(inst.question, inst.gold[args.chaining], str(obj.get("prediction", "")))
                checked += 1
                correct += int(verdict.chain_correct)
                sink.write(json.dumps({
                    "instance_id": inst.id,
                    "answer_correct": verdict.answer_correct,
                    "chain_correct": verdict.chain_correct,
                    "errors": [e.value for e in verdict.errors],
                    "label": verdict.label,
                    "first_bad_line": verdict.first_bad_line,
                }) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    print(f"verified {checked} predictions, {correct} chain-correct", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    if args.model_cmd:
        def port_factory():
            return SubprocessPort(args.model_cmd)
    elif args.model_url:
        def port_factory():
            return HttpPort(args.model_url)
    else:
        raise SymchainError("eval needs --model-cmd or --model-url")

    cfg = RunConfig(
        outputs=args.output_strategy,
        chainings=args.chaining,
        depths=args.depths,
        per_depth=args.per_depth,
        seeds=parse_seeds(args.seeds, args.seed),
        step_cap=args.step_cap,
        token_cap=args.token_cap,
        jobs=args.jobs,
        distractors=args.distractors,
    )
    dataset = read_instances(args.dataset) if args.dataset else None
    report = run_evaluation(port_factory, cfg, dataset=dataset)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    print(accuracy_table(report))
    if report.meta.get("incomplete"):
        return 3
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = Report.from_json(fh.read())
    if args.format == "csv":
        sys.stdout.write(accuracy_csv(report))
    else:
        print(accuracy_table(report))
    if args.lengths:
        with open(args.lengths, "w", encoding="utf-8") as fh:
            fh.write(lengths_csv(report))
    if args.errors:
        with open(args.errors, "w", encoding="utf-8") as fh:
            fh.write(error_summary(report))
    return 0


def cmd_serve_ref(args) -> int:
    base = perfect_model(args.chaining)
    if args.kind == "faulty":
        port = faulty_model(base, FaultConfig(
            p_copy=args.p_copy, p_hasty=args.p_hasty,
            p_skip_answer=args.p_skip_answer, seed=args.seed,
        ))
    else:
        port = base
    if args.http:
        server = serve_http(port, args.http)
        print(f"serving on http://127.0.0.1:{args.http}", file=sys.stderr)
        server.serve_forever()
    else:
        serve_stdio(port, sys.stdin, sys.stdout)
    return 0


# ------------------------------------------------------------------ parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help=f"base seed (default: ${_SEED_ENV} or 0)")

    p = sub.add_parser("gen", help="write an instance JSONL split")
    p.add_argument("--depths", type=parse_depths, default=parse_depths("1..5"))
    p.add_argument("--per-depth", type=int, default=1000)
    p.add_argument("--distractors", type=int, default=None,
                   help="fixed distractor count (default: sample 1-3 per instance)")
    add_seed(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("pretrain", help="write the single-depth warm-up set")
    p.add_argument("--count", type=int, default=10000)
    add_seed(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("render", help="expand instances into supervision pairs")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--output", dest="output_strategy", type=OutputStrategy,
                   required=True, metavar="all|step|token")
    p.add_argument("--chaining", type=ChainingStrategy, required=True,
                   metavar="shortest|exhaustive|backward|none")
    p.add_argument("-o", "--out", dest="out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("solve", help="print gold traces for a question string")
    p.add_argument("question")
    p.add_argument("--chaining", type=ChainingStrategy, default=None,
                   metavar="shortest|exhaustive|backward|none")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="score a predictions file against gold")
    p.add_argument("--gold", required=True, help="instance JSONL with gold traces")
    p.add_argument("--predictions", required=True,
                   help="JSONL of {instance_id, prediction}")
    p.add_argument("--chaining", type=ChainingStrategy, required=True,
                   metavar="shortest|exhaustive|backward|none")
    p.add_argument("-o", "--output", default=None, help="verdict JSONL (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="drive an external model and report accuracy")
    p.add_argument("--model-cmd", default=None, help="command speaking the stdio protocol")
    p.add_argument("--model-url", default=None, help="base URL of an HTTP adapter")
    p.add_argument("--output", dest="output_strategy",
                   type=lambda t: _enum_list(OutputStrategy, t),
                   default=[OutputStrategy.STEP_BY_STEP], metavar="all|step|token[,...]")
    p.add_argument("--chaining", type=lambda t: _enum_list(ChainingStrategy, t),
                   default=[ChainingStrategy.SHORTEST],
                   metavar="shortest|exhaustive|backward|none[,...]")
    p.add_argument("--depths", type=parse_depths, default=parse_depths("1..12"))
    p.add_argument("--per-depth", type=int, default=200)
    p.add_argument("--distractors", type=int, default=None)
    add_seed(p)
    p.add_argument("--seeds", default=None,
                   help="N derived seeds, or an explicit comma list")
    p.add_argument("--dataset", default=None, help="evaluate a fixed instance JSONL")
    p.add_argument("--step-cap", type=int, default=100)
    p.add_argument("--token-cap", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", default=None, help="write report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="format a report JSON as table/CSV")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--lengths", default=None, help="write length-histogram CSV here")
    p.add_argument("--errors", default=None, help="write error-class CSV here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve-ref", help="serve a reference model on stdio or HTTP")
    p.add_argument("--kind", choices=["perfect", "faulty"], default="perfect")
    p.add_argument("--chaining", type=ChainingStrategy, default=ChainingStrategy.SHORTEST,
                   metavar="shortest|exhaustive|backward|none")
    p.add_argument("--p-copy", type=float, default=0.0)
    p.add_argument("--p-hasty", type=float, default=0.0)
    p.add_argument("--p-skip-answer", type=float, default=0.0)
    add_seed(p)
    p.add_argument("--http", type=int, default=None, metavar="PORT")
    p.set_defaults(func=cmd_serve_ref)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config_defaults: dict[str, str] = {}
    if "--config" in argv:
        at = argv.index("--config")
        try:
            config_defaults = _load_config_file(argv[at + 1])
        except (IndexError, OSError, SymchainError) as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return 1
        del argv[at : at + 2]
        # Flags given on the command line override config-file values.
        for key, value in config_defaults.items():
            flag = "--" + key.replace("_", "-")
            if flag not in argv:
                argv.extend([flag, value])

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 3
    except (SymchainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
