"""Cluster a synthetic Gaussian mixture end to end and compare with random-init K-means.

    python3 scripts/synthetic_demo.py --k 4 --out demo_out
"""
import argparse
import json
from pathlib import Path

import numpy as np

from mstseed.kmeans import lloyd, random_init
from mstseed.metrics import MetricKind
from mstseed.pipeline import PipelineConfig, run
from mstseed.validity import overlap_score


def mixture(k, per, sep, seed):
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * np.arange(k) / k
    radius = sep / (2 * np.sin(np.pi / k)) if k > 1 else 0.0
    centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    truth = np.repeat(np.arange(k), per)
    return centers[truth] + rng.normal(size=(k * per, 2)), truth


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--per", type=int, default=300)
    ap.add_argument("--sep", type=float, default=10.0, help="center spacing in units of the noise std")
    ap.add_argument("--index", choices=["exact", "nn"], default="exact")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    X, truth = mixture(args.k, args.per, args.sep, args.seed)
    np.savetxt(out / "points.csv", X, delimiter=",", fmt="%.10g")
    np.savetxt(out / "truth.txt", truth, fmt="%d")

    cfg = PipelineConfig(input=str(out / "points.csv"), reference=str(out / "truth.txt"),
                         index=args.index, seed=args.seed, output=str(out / "run"))
    res = run(cfg)
    K = int(res.labels.max()) + 1
    scores = [overlap_score(lloyd(X, random_init(X, K, s)).labels, truth)[0] for s in range(50)]
    summary = {
        "K_true": args.k,
        "K_seed": res.seeds.K,
        "epsilon": res.detection.epsilon,
        "k0": res.detection.k0,
        "score": res.validity["score"],
        "db_index": res.validity["db_index"],
        "random_init_median_score": float(np.median(scores)),
        "distance_evaluations": res.counters["mst_distance_evaluations"],
    }
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
