"""Command-line interface: batch JSONL commands plus the stream server.

Exit codes: 0 success, 1 I/O failure, 2 configuration error.  Batch
commands never fail on per-record problems; those are emitted inline as
``{"error": {...}}`` records and processing continues.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, EngineConfig, apply_overrides, load_config
from .errors import EngineError
from .jsonio import dumps, iter_jsonl
from .ops import HANDLERS, Engine, error_json, op_eval
from .stream import serve_stream
from .synthesis import BatchSummary

IO_ERROR = 1
CONFIG_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aesreward",
        description="Deterministic rewards, parsing, synthesis, and metrics "
                    "for pairwise video-aesthetics judgments.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--provider",
                        help="embedding provider: fallback | store:<path> | http(s)://...")
    parser.add_argument("--weights-acc", type=float, dest="lambda_acc")
    parser.add_argument("--weights-fmt", type=float, dest="lambda_fmt")
    parser.add_argument("--weights-cst", type=float, dest="lambda_cst")
    parser.add_argument("--weights-prc", type=float, dest="lambda_prc")
    parser.add_argument("--weights-dim", dest="dim_weights",
                        help="three comma-separated dimension weights, e.g. 0.3,0.2,0.5")
    parser.add_argument("--pb-variant", choices=("canonical", "raw"))
    tie_group = parser.add_mutually_exclusive_group()
    tie_group.add_argument("--use-ties", dest="use_ties", action="store_true",
                           default=None)
    tie_group.add_argument("--no-use-ties", dest="use_ties", action="store_false",
                           default=None)
    parser.add_argument("--clamp-weights", dest="clamp_weights", action="store_true",
                        default=None)

    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("parse", "parse raw outputs into structured reports"),
        ("reward", "compute reward breakdowns for raw outputs"),
        ("synthesize", "select self-consistent traces from sample pools"),
        ("eval", "compute accuracy rates and position bias"),
        ("weights", "compute win rates, advantages, and sample weights"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("input", help="input JSONL file")
        cmd.add_argument("-o", "--output", help="output file (default: stdout)")
        if name == "parse":
            cmd.add_argument("--variant", choices=("base", "cot"), default="cot")
        if name == "eval":
            cmd.add_argument("--csv", help="also write a CSV rate summary")
    sub.add_parser("serve", help="serve newline-delimited JSON requests on stdin")
    return parser


def _resolve_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config) if args.config else EngineConfig()
    dim_weights = None
    if args.dim_weights is not None:
        try:
            parts = tuple(float(x) for x in args.dim_weights.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --weights-dim: {exc}") from exc
        if len(parts) != 3:
            raise ConfigError("--weights-dim needs exactly three values")
        dim_weights = parts
    return apply_overrides(
        config,
        provider=args.provider,
        use_ties=args.use_ties,
        pb_variant=args.pb_variant,
        clamp_weights=args.clamp_weights,
        lambda_acc=args.lambda_acc,
        lambda_fmt=args.lambda_fmt,
        lambda_cst=args.lambda_cst,
        lambda_prc=args.lambda_prc,
        dim_weights=dim_weights,
    )


def _run_batch(args: argparse.Namespace, engine: Engine) -> int:
    handler = HANDLERS[args.command]
    try:
        infile = open(args.input, encoding="utf-8")
    except OSError as exc:
        print(f"aesreward: cannot read {args.input}: {exc}", file=sys.stderr)
        return IO_ERROR

    lines: list[str] = []
    feasibility = [0, 0]
    with infile:
        for lineno, obj, err in iter_jsonl(infile):
            if err is not None:
                lines.append(dumps({"error": {"code": "BAD_REQUEST", "message": err}}))
                continue
            payload = dict(obj)
            if args.command == "parse":
                payload.setdefault("variant", args.variant)
            try:
                result = handler(engine, payload)
            except EngineError as exc:
                record = {"error": error_json(exc)}
                if isinstance(obj, dict) and "pair_id" in obj:
                    record["pair_id"] = obj["pair_id"]
                lines.append(dumps(record))
                continue
            if args.command == "synthesize":
                feasible = all(result["feasible_per_dimension"].values())
                feasibility[0 if feasible else 1] += 1
            lines.append(dumps(result))

    if args.command == "synthesize":
        summary = BatchSummary(
            n_pools=feasibility[0] + feasibility[1],
            n_fully_feasible=feasibility[0],
            n_partially_infeasible=feasibility[1],
        )
        lines.append(dumps({"summary": summary.to_json()}))

    return _emit(lines, args.output)


def _run_eval(args: argparse.Namespace, engine: Engine) -> int:
    try:
        infile = open(args.input, encoding="utf-8")
    except OSError as exc:
        print(f"aesreward: cannot read {args.input}: {exc}", file=sys.stderr)
        return IO_ERROR
    pairs = []
    errors = []
    with infile:
        for lineno, obj, err in iter_jsonl(infile):
            if err is not None:
                errors.append({"error": {"code": "BAD_REQUEST", "message": err}})
            else:
                pairs.append(obj)
    try:
        result = op_eval(engine, {"pairs": pairs})
    except EngineError as exc:
        result = {"error": error_json(exc)}
    lines = [dumps(e) for e in errors] + [dumps(result)]
    code = _emit(lines, args.output)
    if code == 0 and getattr(args, "csv", None) and "report" in result:
        report = result["report"]
        rows = ["metric,value"]
        for key in ("binary_acc", "binary_acc_no_ties", "three_class_acc", "avg_acc"):
            value = report[key]
            rows.append(f"{key},{'' if value is None else dumps(value)}")
        for dim, value in report["per_dim_acc"].items():
            rows.append(f"acc_{dim},{dumps(value)}")
        try:
            Path(args.csv).write_text("\n".join(rows) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"aesreward: cannot write {args.csv}: {exc}", file=sys.stderr)
            return IO_ERROR
    return code


def _emit(lines: list[str], output: str | None) -> int:
    text = "".join(line + "\n" for line in lines)
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"aesreward: cannot write {output}: {exc}", file=sys.stderr)
            return IO_ERROR
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"aesreward: config error: {exc.message}", file=sys.stderr)
        return CONFIG_ERROR

    engine = Engine(config)
    if args.command == "serve":
        return serve_stream(config, sys.stdin, sys.stdout)
    if args.command == "eval":
        return _run_eval(args, engine)
    return _run_batch(args, engine)


if __name__ == "__main__":
    sys.exit(main())
