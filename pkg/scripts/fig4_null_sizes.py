"""Mean chance-cluster size on uniform data against 2 sinh(lambda eps^L).

    python3 scripts/fig4_null_sizes.py --trials 200 --outdir null_sizes
"""
import argparse
from pathlib import Path

import numpy as np

from mstseed.nullsim import run_null_trials, theory_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--steps", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="null_sizes")
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for n in args.n:
        grid = theory_grid(n, 2, steps=args.steps)
        res = run_null_trials(n, 2, grid, args.trials, seed=args.seed + n)
        res.to_csv(out / f"null_n{n}.csv")
        z = (res.mean_size_emp - res.size_theory) / res.stderr_size_emp
        print(f"N={n}: {int(np.sum(np.abs(z) <= 3))}/{grid.size} thresholds within 3 SE")
        for eps, emp, th, zi in zip(grid, res.mean_size_emp, res.size_theory, z):
            print(f"  eps={eps:.4f}  empirical={emp:8.3f}  theory={th:8.3f}  z={zi:+7.2f}")


if __name__ == "__main__":
    main()
