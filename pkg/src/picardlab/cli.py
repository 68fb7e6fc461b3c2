"""Command line entry point.

Usage::

    picardlab <experiment> [--config PATH] [--seed S] [--threads T]
              [--out DIR] [--check]
    picardlab list

Exit codes: 0 success, 2 validation error, 3 gate failure under
``--check``.  Thread count comes from --threads, else the
PICARDLAB_THREADS environment variable, else 1.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    parse_config,
    run_experiment,
    write_record,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="picardlab",
        description="Desk-scale experiments on the second Picard iteration "
        "of the Wick-ordered cubic Schrodinger equation with random data.",
    )
    parser.add_argument("command", help="experiment name, or 'list'")
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--threads", type=int, help="Monte Carlo worker threads")
    parser.add_argument("--out", help="output directory for record.json and series.csv")
    parser.add_argument(
        "--check", action="store_true", help="exit 3 when any acceptance gate fails"
    )
    return parser


def _thread_count(arg_value) -> int:
    if arg_value is not None:
        value = arg_value
    else:
        env = os.environ.get("PICARDLAB_THREADS")
        if env is None or not env.strip():
            return 1
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"PICARDLAB_THREADS must be an integer, got {env!r}")
    if value < 1:
        raise ConfigError("thread count must be at least 1")
    return value


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        config = ExperimentConfig(experiment=args.command)
    else:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        config = parse_config(path.read_text(encoding="utf-8"), experiment=args.command)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        width = max(len(name) for name in EXPERIMENTS)
        for name in sorted(EXPERIMENTS):
            print(f"{name:<{width}}  {EXPERIMENTS[name].description}")
        return 0

    try:
        config = _load_config(args)
        threads = _thread_count(args.threads)
        record = run_experiment(config, threads=threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or config.output_path or os.path.join("runs", args.command)
    record_path, csv_path = write_record(record, out_dir)

    for row in record.series:
        print(f"N={row['N']:<6d} value={row['value']:.6g} stderr={row['stderr']:.3g}")
    if record.fit is not None:
        print(
            f"fit: v = {record.fit.intercept:.6g} + {record.fit.slope:.6g} ln N"
            f"  (R^2 = {record.fit.r_squared:.6f})"
        )
    for name, passed in record.gates.items():
        print(f"gate {name}: {'pass' if passed else 'FAIL'}")
    print(f"wrote {record_path} and {csv_path}")

    if args.check and not record.gates_passed:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
