"""Command line: ``pricedsort gen | run | report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import ExperimentSpec, SchemaMismatch, report, run_experiment
from .generators import KINDS, BadParams, generate_instance


def _param(text: str):
    key, _, value = text.partition("=")
    if not key or not value:
        raise argparse.ArgumentTypeError("parameters look like key=value")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pricedsort", description="Priced-comparison sorting experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write one generated instance as JSON")
    gen.add_argument("--kind", required=True, choices=KINDS)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--param", action="append", type=_param, default=[], help="extra generator parameter key=value")

    run = sub.add_parser("run", help="run an experiment spec and write a CSV table")
    run.add_argument("--spec", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=None)

    rep = sub.add_parser("report", help="aggregate result tables")
    rep.add_argument("--in", dest="inputs", nargs="+", required=True)
    rep.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            params = dict(args.param)
            params["N" if args.kind == "random_sizes" else "n"] = args.n
            inst = generate_instance(args.kind, params, args.seed)
            Path(args.out).write_text(inst.dumps() + "\n")
            return 0
        if args.command == "run":
            spec = ExperimentSpec.load(args.spec)
            spec.out = args.out
            if args.workers:
                spec.workers = args.workers
            rows = run_experiment(spec)
            bad = [r for r in rows if r["status"] != "ok"]
            print(f"{len(rows)} rows, {len(bad)} not ok -> {args.out}")
            return 0 if not bad or spec.allow_failures else 1
        summary = report(args.inputs, args.out)
        print(f"{len(summary)} summary rows -> {args.out}")
        return 0
    except (BadParams, SchemaMismatch, ValueError, OSError) as exc:
        print(f"pricedsort: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
