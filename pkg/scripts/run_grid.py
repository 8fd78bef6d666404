"""Run an experiment spec and print a per-family summary of iterations and core sizes.

    python scripts/run_grid.py configs/families_grid.json --workers 4
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import numpy as np

from corediffusion.experiment import ExperimentSpec, run_experiment


def summarize(aggregate: Path):
    groups = defaultdict(list)
    with open(aggregate, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["family"], row["n"], row["seed_policy"], row["eps_label"])
            groups[key].append(row)
    print(f"{'family':<10}{'n':>7}  {'seed':<12}{'eps':<8}{'iters':>9}{'core':>8}  status")
    for (family, n, policy, eps), rows in groups.items():
        its = np.array([int(r["iterations"]) for r in rows if r["iterations"]])
        core = np.array([int(r["core_size"]) for r in rows if r["core_size"]])
        statuses = sorted({r["status"] for r in rows})
        print(f"{family:<10}{n:>7}  {policy:<12}{eps:<8}{its.mean():>9.1f}{core.mean():>8.1f}  {','.join(statuses)}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("spec", type=Path)
    ap.add_argument("-o", "--output-dir", type=Path)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    spec = ExperimentSpec.load(args.spec)
    aggregate = run_experiment(spec, args.output_dir, workers=args.workers)
    print(f"wrote {aggregate}")
    summarize(aggregate)


if __name__ == "__main__":
    main()
