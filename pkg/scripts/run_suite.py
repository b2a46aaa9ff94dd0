"""Run every config in configs/ and write reports to results/."""
import argparse
import sys
from pathlib import Path

from ranklip.experiments import load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", type=Path, default=ROOT / "configs")
    parser.add_argument("--out", type=Path, default=ROOT / "results")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--only", nargs="*", help="config stems to run, e.g. gap rates")
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for path in sorted(args.configs.iterdir()):
        if args.only and path.stem not in args.only:
            continue
        target = args.out / f"{path.stem}.{args.format}"
        cfg = load_config(path, out=str(target), format=args.format)
        result = run_experiment(cfg)
        worst = max(worst, result.status)
        print(f"{path.name:22s} status={result.status} rows={len(result.rows):4d} -> {target}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
