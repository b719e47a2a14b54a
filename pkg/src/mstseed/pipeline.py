"""End-to-end clustering run: load, MST, threshold, seed, refine, report.

Outputs written to ``config.output``:

* ``trajectory.csv``  Prim steps (iteration, vertex, parent, length)
* ``seeds.json``      detected seed clusters and the eps/k0 used
* ``labels.csv``      final ``index,label`` (plus ``labels_mask<k>`` rasters)
* ``centroids.csv``   final centroids, one row per cluster
* ``index.csv``       descriptor table (``index = nn`` only)
* ``validity.json``   and ``confusion.csv`` when a reference labeling is given
* ``manifest.json``   config, versions, timings and distance-evaluation counters

Files are staged in a scratch directory and moved into place only when the
whole run succeeds.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import platform
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy

from . import __version__
from .dataset_io import Dataset, export_labels, load_csv, load_raster, load_reference, require_points, subsample
from .errors import ConfigError, ContractError, DegenerateError
from .kmeans import ClusterModel, lloyd, point_costs
from .metrics import MetricKind, pair_count, pairwise_matrix
from .modes import SeedClusters, extract
from .nn_index import IndexParams, NNMstResult, nn_mst
from .poisson import EXACT_DIAMETER_LIMIT, DIAMETER_RESTARTS, DetectionParams, default_threshold, min_run_length, null_for_dataset
from .prim import PrimDescriptor, prim
from .validity import validity_report

log = logging.getLogger(__name__)

AUTO = "auto"


@dataclass
class PipelineConfig:
    input: str = ""
    raster_data: str = ""
    has_header: bool = False
    row_step: int = 1
    col_step: int = 1
    metric: str = "euclidean"
    alpha: Optional[float] = None
    index: str = "exact"
    leaf_confidence: float = 0.05
    sample_size: int = 4096
    leaf_occupancy: int = 32
    epsilon: Union[str, float] = AUTO
    pfa: float = 0.01
    k0: Union[str, int] = AUTO
    refine: bool = True
    max_iter: int = 100
    tol: Optional[float] = None
    keep_noise: bool = False
    reference: str = ""
    output: str = "out"
    seed: int = 0
    root: int = 0

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        raw = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {line_no}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key.replace("-", "_")] = value
        return cls.from_mapping(raw)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_mapping(cls, raw: dict, base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        cfg = dataclasses.replace(base) if base is not None else cls()
        names = {f.name for f in dataclasses.fields(cls)}
        for key, value in raw.items():
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value))
        return cfg

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_BOOLS = {"has_header", "refine", "keep_noise"}
_INTS = {"row_step", "col_step", "sample_size", "leaf_occupancy", "max_iter", "seed", "root"}
_FLOATS = {"leaf_confidence", "pfa"}
_OPT_FLOATS = {"alpha", "tol"}


def _coerce(key, value):
    if not isinstance(value, str):
        return value
    try:
        if key in _BOOLS:
            v = value.lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if key in _INTS:
            return int(value)
        if key in _FLOATS:
            return float(value)
        if key in _OPT_FLOATS:
            return None if value == "" else float(value)
        if key == "epsilon":
            return AUTO if value == AUTO else float(value)
        if key == "k0":
            return AUTO if value == AUTO else int(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot interpret {value!r}") from None
    return value


def validate_config(cfg: PipelineConfig) -> list[str]:
    """Every violated constraint as ``"field: message"``; empty when runnable."""
    out = []
    if not cfg.input:
        out.append("input: no input file given")
    elif not Path(cfg.input).exists():
        out.append(f"input: {cfg.input} does not exist")
    if cfg.alpha is not None and not (isinstance(cfg.alpha, (int, float)) and 0.0 < cfg.alpha < 1.0):
        out.append(f"alpha: must lie in (0, 1), got {cfg.alpha!r}")
    try:
        MetricKind.parse(cfg.metric)
    except ConfigError as exc:
        out.append(f"metric: {exc}")
    if cfg.index not in ("exact", "nn"):
        out.append("index: must be 'exact' or 'nn'")
    if not 0.0 < cfg.leaf_confidence < 1.0:
        out.append("leaf_confidence: must lie in (0, 1)")
    if cfg.sample_size < 1:
        out.append("sample_size: must be >= 1")
    if cfg.leaf_occupancy < 2:
        out.append("leaf_occupancy: must be >= 2")
    if cfg.epsilon != AUTO and not (isinstance(cfg.epsilon, (int, float)) and cfg.epsilon > 0):
        out.append("epsilon: must be 'auto' or a positive number")
    if not (isinstance(cfg.pfa, (int, float)) and 0.0 < cfg.pfa < 1.0):
        out.append("pfa: must lie in (0, 1)")
    if cfg.k0 != AUTO and not (isinstance(cfg.k0, int) and cfg.k0 >= 1):
        out.append("k0: must be 'auto' or an integer >= 1")
    if cfg.max_iter < 1:
        out.append("max_iter: must be >= 1")
    if cfg.tol is not None and cfg.tol < 0:
        out.append("tol: must be >= 0")
    if cfg.row_step < 1 or cfg.col_step < 1:
        out.append("row_step/col_step: must be >= 1")
    if cfg.root < 0:
        out.append("root: must be >= 0")
    if cfg.reference and not Path(cfg.reference).exists():
        out.append(f"reference: {cfg.reference} does not exist")
    return out


@dataclass
class RunResult:
    dataset: Dataset
    descriptor: PrimDescriptor
    detection: DetectionParams
    seeds: SeedClusters
    model: Optional[ClusterModel]
    labels: np.ndarray
    counters: dict
    artifacts: list = field(default_factory=list)
    validity: Optional[dict] = None
    timings: dict = field(default_factory=dict)
    nn: Optional[NNMstResult] = None


def load_input(cfg: PipelineConfig) -> Dataset:
    path = Path(cfg.input)
    if path.suffix.lower() == ".hdr":
        data = Path(cfg.raster_data) if cfg.raster_data else None
        if data is None:
            for ext in (".raw", ".bsq", ".img", ".dat"):
                if path.with_suffix(ext).exists():
                    data = path.with_suffix(ext)
                    break
        if data is None:
            raise ConfigError(f"raster_data: no data file next to {path}")
        d = load_raster(path, data)
    else:
        d = load_csv(path, cfg.has_header)
    if cfg.row_step != 1 or cfg.col_step != 1:
        d = subsample(d, cfg.row_step, cfg.col_step)
    return d


def cluster_dataset(d: Dataset, cfg: PipelineConfig, reference=None) -> RunResult:
    """Run every stage on an in-memory dataset (no files written)."""
    require_points(d, 2)
    n = d.n_points
    metric = MetricKind.parse(cfg.metric, cfg.alpha)
    if not 0 <= cfg.root < n:
        raise ConfigError(f"root: {cfg.root} out of range for {n} points")
    index_seed, support_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    counters = {"all_pairs": pair_count(n)}
    timings = {}

    t0 = time.perf_counter()
    nn_result = None
    if cfg.index == "nn":
        params = IndexParams(cfg.leaf_confidence, cfg.sample_size, cfg.leaf_occupancy, index_seed)
        nn_result = nn_mst(d, metric, params, cfg.root)
        desc = nn_result.descriptor
        counters["mst_distance_evaluations"] = nn_result.evaluations
        counters["index_leaves"] = int(len(nn_result.index.leaves))
        counters["components_before_repair"] = nn_result.components_before_repair
    else:
        desc = prim(pairwise_matrix(d, metric), cfg.root)
        counters["mst_distance_evaluations"] = pair_count(n)
    timings["mst"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if cfg.epsilon == AUTO:
        epsilon = default_threshold(desc.lengths)
        if epsilon == 0:
            raise DegenerateError("trajectory is flat, automatic threshold is 0; set epsilon explicitly")
    else:
        epsilon = float(cfg.epsilon)
    null = null_for_dataset(d, metric, support_seed)
    counters["support_distance_evaluations"] = (
        pair_count(n) if n <= EXACT_DIAMETER_LIMIT else 2 * DIAMETER_RESTARTS * n
    )
    if cfg.k0 == AUTO:
        k0 = min(min_run_length(cfg.pfa, epsilon, null), max(1, n - 1))
    else:
        k0 = int(cfg.k0)
    detection = DetectionParams(epsilon, cfg.pfa, k0, null)
    seeds = extract(desc, epsilon, k0, d, metric)
    timings["detection"] = time.perf_counter() - t0
    log.info("detected K=%d seed clusters (eps=%.6g, k0=%d, noise=%d)", seeds.K, epsilon, k0, len(seeds.noise))

    t0 = time.perf_counter()
    model = None
    labels = seeds.labels()
    if seeds.K > 0:
        if cfg.refine:
            if cfg.keep_noise:
                keep = labels >= 0
                model = lloyd(d.values[keep], seeds, metric, cfg.max_iter, cfg.tol)
                labels = np.full(n, -1, dtype=int)
                labels[keep] = model.labels
            else:
                model = lloyd(d, seeds, metric, cfg.max_iter, cfg.tol)
                labels = model.labels
        elif not cfg.keep_noise and len(seeds.noise):
            costs = point_costs(metric.embed(d.values[seeds.noise]), seeds.centroids, metric)
            labels[seeds.noise] = np.argmin(costs, axis=1)
    timings["refine"] = time.perf_counter() - t0

    validity = None
    if reference is not None:
        reference = np.asarray(reference)
        if reference.shape != (n,):
            raise ContractError(f"reference has {reference.size} labels for {n} points")
        centroids = model.centroids if model is not None else seeds.centroids
        validity = validity_report(d, labels, reference, metric, centroids).as_dict()

    return RunResult(d, desc, detection, seeds, model, labels, counters,
                     validity=validity, timings=timings, nn=nn_result)


def run(cfg: PipelineConfig) -> RunResult:
    """Execute a configured run and write its artifacts."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    started = time.perf_counter()
    d = load_input(cfg)
    reference = load_reference(cfg.reference) if cfg.reference else None
    result = cluster_dataset(d, cfg, reference)

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        written = _write_artifacts(staging, cfg, result, time.perf_counter() - started)
        final = []
        for p in written:
            target = out / p.name
            if target.exists():
                target.unlink()
            shutil.move(str(p), target)
            final.append(target)
        result.artifacts = final
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return result


def _write_artifacts(dir_: Path, cfg: PipelineConfig, result: RunResult, elapsed: float) -> list[Path]:
    written = []
    traj = dir_ / "trajectory.csv"
    result.descriptor.to_csv(traj)
    written.append(traj)

    seeds = dir_ / "seeds.json"
    summary = result.seeds.summary()
    summary["p_fa"] = cfg.pfa
    seeds.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    written.append(seeds)

    written += export_labels(result.dataset, result.labels, dir_ / "labels.csv")

    cents = dir_ / "centroids.csv"
    C = result.model.centroids if result.model is not None else result.seeds.centroids
    with open(cents, "w", encoding="utf-8") as fh:
        fh.write("cluster," + ",".join(f"x{j}" for j in range(result.dataset.dimension)) + "\n")
        for k, row in enumerate(C):
            fh.write(f"{k}," + ",".join(repr(float(v)) for v in row) + "\n")
    written.append(cents)

    if result.nn is not None:
        idx = dir_ / "index.csv"
        result.nn.index.to_csv(idx)
        written.append(idx)

    if result.validity is not None:
        vpath = dir_ / "validity.json"
        vpath.write_text(json.dumps(result.validity, indent=2) + "\n", encoding="utf-8")
        conf = dir_ / "confusion.csv"
        with open(conf, "w", encoding="utf-8") as fh:
            fh.write("cluster," + ",".join(f"class_{c}" for c in result.validity["classes"]) + "\n")
            for k, row in enumerate(result.validity["confusion"]):
                fh.write(f"{k}," + ",".join(str(v) for v in row) + "\n")
        written += [vpath, conf]

    manifest = {
        "package": "mstseed",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": cfg.as_dict(),
        "rng": {"generator": "numpy.random.PCG64 via SeedSequence", "seed": cfg.seed},
        "n_points": result.dataset.n_points,
        "dimension": result.dataset.dimension,
        "detection": result.detection.as_dict(),
        "K_seed": result.seeds.K,
        "K_final": int(result.labels.max()) + 1 if result.labels.size and result.labels.max() >= 0 else 0,
        "kmeans": None if result.model is None else {
            "iterations": result.model.iterations,
            "converged": result.model.converged,
            "objective": result.model.objective,
            "diagnostic": result.model.diagnostic,
        },
        "counters": result.counters,
        "timings_s": dict(result.timings, total=elapsed),
    }
    mpath = dir_ / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n", encoding="utf-8")
    written.append(mpath)
    return written


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isnan(obj):
        return None
    raise TypeError(type(obj).__name__)
