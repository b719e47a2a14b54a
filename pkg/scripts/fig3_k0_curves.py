"""Minimum run length k0 against the threshold for uniform points in the unit square.

Writes one column per point count; thresholds where k0 saturates are left empty.

    python3 scripts/fig3_k0_curves.py --out k0_curves.csv
"""
import argparse
import csv

import numpy as np

from mstseed.errors import DegenerateError
from mstseed.nullsim import k0_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[100, 200, 600, 2000])
    ap.add_argument("--pfa", type=float, default=0.01)
    ap.add_argument("--eps-max", type=float, default=0.1)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--out", default="k0_curves.csv")
    args = ap.parse_args()

    grid = np.linspace(args.eps_max / args.steps, args.eps_max, args.steps)
    columns = []
    for n in args.n:
        col = []
        for eps in grid:
            try:
                col.append(int(k0_curve(n, 2, args.pfa, [eps])[0]))
            except DegenerateError:
                col.append("")
        columns.append(col)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps"] + [f"k0_n{n}" for n in args.n])
        for i, eps in enumerate(grid):
            w.writerow([f"{eps:.6g}"] + [c[i] for c in columns])
    print(f"wrote {args.out}")
    for i in range(0, len(grid), max(1, len(grid) // 10)):
        print(f"eps={grid[i]:.4f}  " + "  ".join(f"{c[i]!s:>6}" for c in columns))


if __name__ == "__main__":
    main()
