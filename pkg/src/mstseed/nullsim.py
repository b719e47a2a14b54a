"""Monte-Carlo checks of the Poisson null model on uniform point sets."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, DegenerateError
from .metrics import MetricKind, pairwise_matrix
from .modes import find_runs
from .poisson import PoissonNull, min_run_length, min_run_length_continuous
from .prim import prim

GENERATOR = "numpy.random.PCG64"


@dataclass
class NullTrialResult:
    n_points: int
    dim: int
    eps_grid: np.ndarray
    mean_size_emp: np.ndarray
    std_size_emp: np.ndarray
    size_theory: np.ndarray
    k0_theory: np.ndarray  # float, +inf where the threshold is degenerate
    trials: int
    seed: int
    p_fa: float
    generator: str = GENERATOR
    per_trial: np.ndarray = field(default=None, repr=False)

    @property
    def stderr_size_emp(self) -> np.ndarray:
        return self.std_size_emp / math.sqrt(self.trials)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# n={self.n_points} dim={self.dim} trials={self.trials} seed={self.seed} "
                     f"p_fa={self.p_fa} generator={self.generator}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "k0_theory", "mean_size_emp", "std_size_emp", "size_theory", "stderr_size_emp"])
            for row in zip(self.eps_grid, self.k0_theory, self.mean_size_emp, self.std_size_emp,
                           self.size_theory, self.stderr_size_emp):
                k0 = int(row[1]) if math.isfinite(row[1]) else "inf"
                w.writerow([repr(float(row[0])), k0] + [repr(float(v)) for v in row[2:]])


def chance_cluster_mean(traj, epsilon: float) -> float:
    """Average vertex count per block of the trajectory at threshold ``epsilon``.

    The trajectory is cut after every edge longer than ``epsilon``; each
    block holding k >= 1 short edges counts k + 1 vertices, blocks with no
    short edge count 0.  This is the sample analogue of sum_{k>=1} (k+1) P_k.
    """
    g = np.asarray(traj, dtype=float)
    runs = find_runs(g, epsilon)
    total = sum(stop - start + 1 for start, stop in runs)
    blocks = int(np.count_nonzero(g > epsilon)) + (1 if g[-1] <= epsilon else 0)
    return total / blocks


def unit_cube_null(n_points: int, dim: int) -> PoissonNull:
    """Null for [0,1]^L with the support taken as the cube's circumscribed ball."""
    return PoissonNull.from_radius(n_points, dim, math.sqrt(dim) / 2.0)


def k0_curve(n_points: int, dim: int, p_fa: float, eps_grid, continuous: bool = False) -> np.ndarray:
    """Minimum run length k0 along a threshold grid for uniform points in [0,1]^L."""
    null = unit_cube_null(n_points, dim)
    if continuous:
        return np.array([max(1.0, min_run_length_continuous(p_fa, float(e), null)) for e in eps_grid])
    return np.array([min_run_length(p_fa, float(e), null) for e in eps_grid], dtype=np.int64)


def _check_grid(eps_grid) -> np.ndarray:
    grid = np.asarray(eps_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ContractError("eps grid must be positive and strictly increasing")
    return grid


def run_null_trials(
    n_points: int,
    dim: int,
    eps_grid,
    trials: int,
    seed: int = 0,
    p_fa: float = 0.01,
) -> NullTrialResult:
    """Simulate uniform point sets and compare chance-cluster sizes with theory.

    Each trial draws ``n_points`` uniform points in [0,1]^dim, builds the exact
    Euclidean MST and measures :func:`chance_cluster_mean` at every threshold.
    The theoretical value 2 sinh(lambda eps^L) uses the trial's own support
    volume (half-diameter ball), averaged over trials.  Per-trial generators
    are spawned from ``seed`` so results do not depend on execution order.
    """
    if n_points < 2 or trials < 1:
        raise ContractError("need n_points >= 2 and trials >= 1")
    grid = _check_grid(eps_grid)
    emp = np.empty((trials, grid.size))
    theory = np.empty((trials, grid.size))
    for t, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        X = np.random.default_rng(child).random((n_points, dim))
        M = pairwise_matrix(X, MetricKind())
        g = prim(M).lengths
        null = PoissonNull.from_radius(n_points, dim, float(M.max()) / 2.0)
        for j, eps in enumerate(grid):
            emp[t, j] = chance_cluster_mean(g, eps)
            x = null.rate(float(eps))
            theory[t, j] = 2.0 * math.sinh(x) if x < 700 else math.inf
    std = emp.std(axis=0, ddof=1) if trials > 1 else np.zeros(grid.size)
    return NullTrialResult(
        n_points=n_points,
        dim=dim,
        eps_grid=grid,
        mean_size_emp=emp.mean(axis=0),
        std_size_emp=std,
        size_theory=theory.mean(axis=0),
        k0_theory=_k0_or_inf(n_points, dim, p_fa, grid),
        trials=trials,
        seed=seed,
        p_fa=p_fa,
        per_trial=emp,
    )


def _k0_or_inf(n_points, dim, p_fa, grid) -> np.ndarray:
    """k0 curve with +inf where the threshold saturates the connection probability."""
    out = np.empty(grid.size)
    for j, eps in enumerate(grid):
        try:
            out[j] = k0_curve(n_points, dim, p_fa, [eps])[0]
        except DegenerateError:
            out[j] = math.inf
    return out


def theory_grid(n_points: int, dim: int, low: float = 0.5, high: float | None = None, steps: int = 12) -> np.ndarray:
    """Thresholds where 2 sinh(lambda eps^L) runs from ``low`` to ``high`` (default N/4)
    for the unit-cube null, evenly spaced in lambda eps^L."""
    high = n_points / 4.0 if high is None else high
    null = unit_cube_null(n_points, dim)
    lam = math.exp(null.log_intensity)
    xs = np.linspace(math.asinh(low / 2.0), math.asinh(high / 2.0), steps)
    return (xs / lam) ** (1.0 / dim)

