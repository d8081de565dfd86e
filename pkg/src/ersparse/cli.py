"""Command-line entry point: ``ersparse <experiment> [options]``.

Exit codes: 0 all checks passed, 2 some soft tolerance missed, 3 a hard
inequality was violated, 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import ValidationError
from .experiments import EXPERIMENTS, FIELDS, load_config, run_experiment, write_result


def build_parser():
    keys = ", ".join(name for name, _ in FIELDS if name != "experiment")
    parser = argparse.ArgumentParser(
        prog="ersparse",
        description="Sparse random graph spectra, degrees and Poisson-binomial tails.",
        epilog=f"Config keys: {keys}.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="key = value file; keys as listed below")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--replicas", type=int)
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--threads", type=int, help="worker processes for replicas")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    overrides = {"experiment": args.experiment}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 1
        overrides[key.strip()] = value.strip()
    for key in ("seed", "replicas", "out", "threads"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = str(value)
    try:
        cfg = load_config(args.config, overrides)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    try:
        result = run_experiment(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    paths = write_result(result, cfg, cfg.out, time.perf_counter() - start)
    for path in paths:
        print(path)
    for msg in result.hard_failures:
        print(f"HARD: {msg}", file=sys.stderr)
    for msg in result.soft_failures:
        print(f"SOFT: {msg}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
