"""Command line entry point: ``mstseed {cluster,nullsim,validate}``.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric/degenerate error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from .errors import ConfigError, MstSeedError
from .nullsim import run_null_trials
from .pipeline import PipelineConfig, run, validate_config

# flag -> config field; defaults stay None so only given flags override the config file
_FLAG_FIELDS = {
    "input": "input",
    "raster_data": "raster_data",
    "header": "has_header",
    "row_step": "row_step",
    "col_step": "col_step",
    "metric": "metric",
    "alpha": "alpha",
    "index": "index",
    "leaf_confidence": "leaf_confidence",
    "sample_size": "sample_size",
    "leaf_occupancy": "leaf_occupancy",
    "epsilon": "epsilon",
    "pfa": "pfa",
    "k0": "k0",
    "refine": "refine",
    "max_iter": "max_iter",
    "tol": "tol",
    "keep_noise": "keep_noise",
    "reference": "reference",
    "out": "output",
    "seed": "seed",
    "root": "root",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="CSV file or raster .hdr sidecar")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--raster-data", help="raster sample file (default: next to the .hdr)")
    p.add_argument("--header", action="store_const", const="true", help="CSV has a header line")
    p.add_argument("--row-step", type=int)
    p.add_argument("--col-step", type=int)
    p.add_argument("--metric", choices=["euclidean", "sam", "kl", "renyi"])
    p.add_argument("--alpha", type=float, help="Renyi order in (0, 1), default 0.5")
    p.add_argument("--index", choices=["exact", "nn"])
    p.add_argument("--leaf-confidence", type=float, help="mass-outside tolerance for cell splitting")
    p.add_argument("--sample-size", type=int, help="points used for median estimates")
    p.add_argument("--leaf-occupancy", type=int, help="cells with more points than this are split")
    p.add_argument("--epsilon", help="trajectory threshold or 'auto'")
    p.add_argument("--pfa", type=float, help="false-alarm probability")
    p.add_argument("--k0", help="minimum run length or 'auto'")
    p.add_argument("--refine", choices=["on", "off"])
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--keep-noise", action="store_const", const="true")
    p.add_argument("--reference", help="reference labels for the validity report")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--root", type=int, help="Prim start vertex")


def config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    given = {}
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        given[name] = str(value) if not isinstance(value, str) else value
    return PipelineConfig.from_mapping(given, base=cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mstseed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="detect and refine clusters")
    _add_config_flags(p)

    p = sub.add_parser("validate", help="check a configuration without running it")
    _add_config_flags(p)

    p = sub.add_parser("nullsim", help="Monte-Carlo check of the Poisson null model")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--eps-min", type=float, default=0.01)
    p.add_argument("--eps-max", type=float, default=0.1)
    p.add_argument("--eps-steps", type=int, default=20)
    p.add_argument("--pfa", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    return parser


def _cluster(args) -> int:
    cfg = config_from_args(args)
    result = run(cfg)
    report = {
        "K_seed": result.seeds.K,
        "K_final": int(result.labels.max()) + 1 if result.labels.max() >= 0 else 0,
        "epsilon": result.detection.epsilon,
        "k0": result.detection.k0,
        "output": cfg.output,
    }
    if result.validity is not None:
        report["score"] = result.validity["score"]
        report["db_index"] = result.validity["db_index"]
    print(json.dumps(report))
    return 0


def _validate(args) -> int:
    cfg = config_from_args(args)
    problems = validate_config(cfg)
    for line in problems:
        print(line)
    if not problems:
        print("ok")
    return 2 if problems else 0


def _nullsim(args) -> int:
    if args.eps_steps < 1 or not 0 < args.eps_min <= args.eps_max:
        raise ConfigError("need 0 < eps-min <= eps-max and eps-steps >= 1")
    grid = np.linspace(args.eps_min, args.eps_max, args.eps_steps) if args.eps_steps > 1 else np.array([args.eps_min])
    res = run_null_trials(args.n, args.dim, grid, args.trials, args.seed, args.pfa)
    if args.out == "-":
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "null.csv")
            res.to_csv(path)
            with open(path, encoding="utf-8") as fh:
                sys.stdout.write(fh.read())
    else:
        res.to_csv(args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"cluster": _cluster, "validate": _validate, "nullsim": _nullsim}
    try:
        return handlers[args.command](args)
    except MstSeedError as exc:
        print(f"mstseed {args.command}: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"mstseed {args.command}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
