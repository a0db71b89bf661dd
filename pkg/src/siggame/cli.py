"""Command-line front end: run experiment batches, report on stored runs,
validate configurations.

    siggame run <preset-or-config.yaml> [--reps N] [--seed S] [--workers W]
                [--out DIR] [--trace REP_INDEX] [--set key=value]...
    siggame report <runs.csv> [--out DIR]
    siggame validate <preset-or-config.yaml>

The output directory defaults to ./siggame_out/<config name>, overridable
with --out or the SIGGAME_OUT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import apply_overrides, load_config
from .experiment import ConfigError, run_batch, run_repetition, validate_config
from .reporting import (
    RunsCsvError,
    format_report,
    format_summary,
    read_runs_csv,
    report_from_rows,
    write_bundle,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siggame",
        description="Signaling-game experiments between agents in separate environments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch of seeded repetitions")
    run.add_argument("config", help="preset name or YAML config path")
    run.add_argument("--reps", type=int, help="override repetition count")
    run.add_argument("--seed", type=int, help="override master seed")
    run.add_argument("--workers", type=int, default=0,
                     help="worker processes (default: available cores)")
    run.add_argument("--out", help="output directory for the CSV bundle")
    run.add_argument("--trace", type=int, metavar="REP_INDEX",
                     help="also write the full episode trace of one repetition")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="dotted-path config override")

    report = sub.add_parser("report", help="histograms and cross-tab from a runs CSV")
    report.add_argument("runs_csv", help="runs.csv produced by `siggame run`")
    report.add_argument("--out", help="directory for recomputed CSV artifacts")

    validate = sub.add_parser("validate", help="check a config without running it")
    validate.add_argument("config", help="preset name or YAML config path")
    return parser


def _resolve_out_dir(arg: str | None, config_name: str) -> Path:
    if arg:
        return Path(arg)
    env = os.environ.get("SIGGAME_OUT")
    if env:
        return Path(env)
    safe = config_name.replace(" ", "_").lower()
    return Path("siggame_out") / safe


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        config = apply_overrides(config, args.overrides)
        if args.reps is not None:
            config = replace(config, repetitions=args.reps)
        if args.seed is not None:
            config = replace(config, master_seed=args.seed)
        problems = validate_config(config)
        if problems:
            for problem in problems:
                print(f"config error: {problem}", file=sys.stderr)
            return 2
        if args.trace is not None and not 0 <= args.trace < config.repetitions:
            print(f"config error: --trace {args.trace} outside repetition range",
                  file=sys.stderr)
            return 2
        summary = run_batch(config, workers=args.workers or None)
        trace = None
        if args.trace is not None:
            trace = run_repetition(config, args.trace, collect_trace=True).episodes
        out_dir = _resolve_out_dir(args.out, config.name)
        written = write_bundle(summary, out_dir, trace=trace)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(format_summary(summary))
    print()
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    try:
        rows = read_runs_csv(args.runs_csv)
    except RunsCsvError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 2
    histograms, crosstab = report_from_rows(rows)
    print(format_report(histograms, crosstab, len(rows)))
    if args.out:
        from .reporting import CROSSTAB_CSV, HISTOGRAM_CSV, write_crosstab_csv, write_histogram_csv

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        print(f"wrote {write_histogram_csv(histograms, out / HISTOGRAM_CSV)}")
        print(f"wrote {write_crosstab_csv(crosstab, out / CROSSTAB_CSV)}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    problems = validate_config(config)
    if problems:
        for problem in problems:
            print(f"violation: {problem}", file=sys.stderr)
        return 2
    print(f"ok: {config.name!r} is a valid configuration")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "report": cmd_report, "validate": cmd_validate}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
