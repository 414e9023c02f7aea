"""Command line front end: run, validate, report.

Exit codes: 0 success, 2 configuration problem, 3 runtime numerical
failure (partial CSV already flushed).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import load_config
from .errors import ConfigError
from .reporting import markdown_report, merge_reports
from .runner import RunFailure, run


def _thread_count(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("BANACH_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"BANACH_THREADS must be an integer, got {env!r}")
    return 1


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        threads = _thread_count(args.threads)
    except ConfigError as e:
        print(f"error: {args.config}: {e}", file=sys.stderr)
        return 2
    for note in cfg.diagnostics():
        print(f"warning: {note}", file=sys.stderr)
    try:
        result = run(cfg, out_dir=args.out, plot=args.plot, threads=threads,
                     seed_override=args.seed_override)
    except RunFailure as e:
        print(f"error: {e}", file=sys.stderr)
        if e.csv_path:
            print(f"partial results flushed to {e.csv_path}", file=sys.stderr)
        return 3
    print(f"wrote {result.csv_path} ({len(result.rows)} rows) and {result.json_path}")
    for p in result.svg_paths:
        print(f"wrote {p}")
    return 0


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"error: {args.config}: {e}", file=sys.stderr)
        return 2
    for note in cfg.diagnostics():
        print(f"warning: {note}")
    print("ok")
    return 0


def _cmd_report(args) -> int:
    try:
        merged = merge_reports(args.csv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(markdown_report(merged))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="banach",
        description="Run normed-space experiments from JSON configs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--plot", action="store_true", help="also write SVG plots")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: BANACH_THREADS or 1)")
    p_run.add_argument("--seed-override", type=int, default=None,
                       help="replace the config seed list with this one seed")
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    p_rep = sub.add_parser("report", help="merge CSVs into a markdown summary")
    p_rep.add_argument("csv", nargs="+")
    p_rep.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
