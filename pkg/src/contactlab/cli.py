"""Command-line entry point.

contactlab <command> --config <path> [--out <dir>] [--seed N]

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
failure (collapse, non-convergence, lost invertibility) with a partial
report still written.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import COMMANDS, load_config_file, resolve_config
from .errors import NumericalError, ValidationError
from .report import RunReport, emit_report
from .runner import persist_fields, run_experiment

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactlab",
        description="numerical laboratory for zero-range quantum interactions",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML or JSON config file")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else 0

    start = time.monotonic()
    try:
        raw = load_config_file(args.config)
        cfg = resolve_config(args.command, raw, args.seed, args.out)
    except (ValidationError, OSError) as exc:
        print(f"contactlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        report, extra_files = run_experiment(cfg)
    except ValidationError as exc:
        print(f"contactlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        partial = RunReport(
            config_echo=cfg.echo(),
            results={"error": {"type": type(exc).__name__, "message": str(exc)}},
            provenance={"partial": True},
            warnings=[f"numerical failure: {exc}"],
        )
        emit_report(partial, cfg.output_dir, wall_time=time.monotonic() - start)
        print(f"contactlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    emit_report(report, cfg.output_dir, wall_time=time.monotonic() - start)
    persist_fields(extra_files, cfg.output_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
