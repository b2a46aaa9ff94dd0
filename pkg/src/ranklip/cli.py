"""Command line entry point: ``ranklip <experiment> --config <path> [--seed N] [--out <path>] [--format csv|json]``."""
from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENTS, ConfigError, load_config, run_experiment

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ranklip", description="Listwise ranking bound experiments.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="flat key=value file or JSON object")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="report path; stdout when omitted")
    parser.add_argument("--format", choices=("json", "csv"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, experiment=args.experiment, seed=args.seed,
                          out=args.out, format=args.format)
    except (OSError, ConfigError) as exc:
        print(f"ranklip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = run_experiment(cfg)
    if not cfg.out:
        sys.stdout.write(result.to_json() if cfg.format == "json" else result.to_csv())
    status = "ok" if result.status == EXIT_OK else "check failed"
    print(f"ranklip {cfg.experiment}: {status} ({len(result.rows)} rows)", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
