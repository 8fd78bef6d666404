"""Plot l1_delta and core size against iteration for every curve of an experiment.

Needs matplotlib (``pip install -e .[plot]``).

    python scripts/plot_convergence.py results/families_grid --eps 10/n
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_curve(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = [int(r["t"]) for r in rows]
    return t, [float(r["l1_delta"]) for r in rows], [int(r["core_size"]) for r in rows]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("results", type=Path, help="experiment output directory")
    ap.add_argument("--eps", help="only plot runs with this eps label")
    ap.add_argument("-o", "--out", type=Path)
    args = ap.parse_args()

    with open(args.results / "aggregate.csv", newline="") as fh:
        runs = [r for r in csv.DictReader(fh) if r["curve"] and r["rep"] == "0"]
    if args.eps:
        runs = [r for r in runs if r["eps_label"] == args.eps]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    for r in runs:
        t, delta, core = read_curve(args.results / "curves" / r["curve"])
        label = f"{r['family']} n={r['n']} {r['seed_policy']} eps={r['eps_label']}"
        ax1.semilogy(t, delta, label=label, lw=1)
        ax2.plot(t, core, lw=1)
    ax1.set_xscale("log")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("L1 change")
    ax2.set_xscale("log")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("core size")
    ax1.legend(fontsize=6)
    fig.tight_layout()
    out = args.out or args.results / "convergence.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
