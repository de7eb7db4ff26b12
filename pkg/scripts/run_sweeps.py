"""Run every spec in scripts/specs and summarize the tables.

usage: python3 scripts/run_sweeps.py [OUTDIR] [--workers K]
"""

import argparse
from pathlib import Path

from pricedsort.bench import ExperimentSpec, report, run_experiment

HERE = Path(__file__).parent


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("outdir", nargs="?", default="results")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    tables = []
    for spec_path in sorted((HERE / "specs").glob("*.json")):
        spec = ExperimentSpec.load(spec_path)
        spec.out = str(out / f"{spec_path.stem}.csv")
        spec.workers = args.workers
        rows = run_experiment(spec)
        print(f"{spec_path.stem}: {len(rows)} rows, {sum(r['status'] == 'ok' for r in rows)} ok")
        tables.append(spec.out)
    for s in report(tables, out / "summary.csv"):
        print(f"{s['kind']:12s} {s['algorithm']:16s} n={s['n']:6d} mean={s['mean_cost_all']:.1f} slope={s['slope']:.3f}")


if __name__ == "__main__":
    main()
