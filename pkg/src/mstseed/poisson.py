"""False-alarm control for mode detection under a homogeneous Poisson null.

Under the null the points are spread with constant intensity over a ball of
volume V covering the data.  With lambda = C_L * N / V, the probability that
Prim connects a new vertex with an edge shorter than eps is

    F(eps) = 1 - exp(-lambda * eps**L)

and k0 successive short edges happen by chance with probability F(eps)**k0.
Everything below is expressed through ``x = lambda * eps**L``, evaluated in
log space so that large L does not underflow the volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import ContractError, DegenerateError, RangeError
from .metrics import MetricKind, max_pairwise

EXACT_DIAMETER_LIMIT = 2000
DIAMETER_RESTARTS = 4
SINH_LIMIT = 700.0


def log_unit_ball_volume(L: int) -> float:
    if L < 1:
        raise ContractError("dimension must be >= 1")
    return math.log(2.0) + 0.5 * L * math.log(math.pi) - math.log(L) - float(gammaln(0.5 * L))


def unit_ball_volume(L: int) -> float:
    """C_L = 2 pi^(L/2) / (L Gamma(L/2))."""
    return math.exp(log_unit_ball_volume(L))


@dataclass(frozen=True)
class PoissonNull:
    """Intensity model for N points in L dimensions over a support of volume V."""

    n_points: int
    dim: int
    log_volume: float

    @classmethod
    def from_volume(cls, n_points: int, dim: int, volume: float) -> "PoissonNull":
        if volume <= 0:
            raise DegenerateError("support volume must be positive")
        return cls(n_points, dim, math.log(volume))

    @classmethod
    def from_radius(cls, n_points: int, dim: int, radius: float) -> "PoissonNull":
        if radius <= 0:
            raise DegenerateError("support radius must be positive")
        return cls(n_points, dim, log_unit_ball_volume(dim) + dim * math.log(radius))

    @property
    def support_volume(self) -> float:
        return math.exp(self.log_volume)

    @property
    def log_intensity(self) -> float:
        return log_unit_ball_volume(self.dim) + math.log(self.n_points) - self.log_volume

    @property
    def intensity(self) -> float:
        return math.exp(self.log_intensity)

    def rate(self, epsilon: float) -> float:
        """lambda * eps**L."""
        if epsilon < 0:
            raise ContractError("threshold must be nonnegative")
        if epsilon == 0:
            return 0.0
        log_x = self.log_intensity + self.dim * math.log(epsilon)
        return math.exp(log_x) if log_x < 709.0 else math.inf


@dataclass(frozen=True)
class DetectionParams:
    epsilon: float
    p_fa: float
    k0: int
    null: PoissonNull = field(repr=False)

    @property
    def L(self) -> int:
        return self.null.dim

    @property
    def N(self) -> int:
        return self.null.n_points

    @property
    def support_volume(self) -> float:
        return self.null.support_volume

    @property
    def intensity(self) -> float:
        return self.null.intensity

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "p_fa": self.p_fa,
            "k0": self.k0,
            "dim": self.L,
            "n_points": self.N,
            "log_support_volume": self.null.log_volume,
            "rate": self.null.rate(self.epsilon),
        }


def _rate(epsilon, params) -> float:
    null = params.null if isinstance(params, DetectionParams) else params
    return null.rate(epsilon)


def _log_connect(x: float) -> float:
    """log(1 - exp(-x)), accurate for both small and large x."""
    return math.log(-math.expm1(-x)) if x < 1.0 else math.log1p(-math.exp(-x))


def connection_cdf(epsilon: float, lam: float, L: int) -> float:
    if epsilon < 0 or lam <= 0:
        raise ContractError("need epsilon >= 0 and lambda > 0")
    return -math.expm1(-lam * epsilon ** L)


def false_alarm_probability(k0: int, epsilon: float, params) -> float:
    if k0 < 1:
        raise ContractError("k0 must be >= 1")
    x = _rate(epsilon, params)
    if x == 0:
        return 0.0
    # log space keeps the value accurate for very large k0
    return math.exp(k0 * _log_connect(x))


def _k0_ratio(p_fa: float, x: float) -> float:
    if math.exp(-x) == 0.0:
        raise DegenerateError(
            f"connection probability is numerically 1 (lambda*eps^L = {x:.4g}); lower the threshold"
        )
    if x == 0:
        return 0.0
    return math.log(p_fa) / _log_connect(x)


def min_run_length_continuous(p_fa: float, epsilon: float, params) -> float:
    """The un-rounded ratio log(p_fa) / log(1 - exp(-lambda eps^L))."""
    if not 0.0 < p_fa < 1.0:
        raise ContractError("p_fa must lie in (0, 1)")
    return _k0_ratio(p_fa, _rate(epsilon, params))


def min_run_length(p_fa: float, epsilon: float, params) -> int:
    """Least k0 >= 1 with ``false_alarm_probability(k0, epsilon) <= p_fa``."""
    if not 0.0 < p_fa < 1.0:
        raise ContractError("p_fa must lie in (0, 1)")
    if epsilon <= 0:
        raise ContractError("threshold must be positive")
    ratio = _k0_ratio(p_fa, _rate(epsilon, params))
    if not ratio <= 2.0 ** 53:
        # neighbouring integers are no longer distinguishable in P_FA
        raise DegenerateError(
            f"connection probability is numerically 1 (k0 ~ {ratio:.3g}); lower the threshold"
        )
    k = max(1, math.ceil(ratio))
    # the ceiling can land one off when the ratio is within rounding of an integer
    while k > 1 and false_alarm_probability(k - 1, epsilon, params) <= p_fa:
        k -= 1
    while false_alarm_probability(k, epsilon, params) > p_fa:
        k += 1
    return k


def run_length_pmf(k: int, epsilon: float, params) -> float:
    """Probability of exactly k short connections followed by a long one."""
    if k < 0:
        raise ContractError("k must be >= 0")
    x = _rate(epsilon, params)
    return (-math.expm1(-x)) ** k * math.exp(-x)


def expected_false_cluster_size(epsilon: float, params) -> float:
    """Mean vertex count of a chance cluster, sum_{k>=1} (k+1) P_k = 2 sinh(lambda eps^L)."""
    if epsilon <= 0:
        raise ContractError("threshold must be positive")
    x = _rate(epsilon, params)
    if x > SINH_LIMIT:
        raise RangeError(f"lambda*eps^L = {x:.4g} overflows the expected cluster size")
    return 2.0 * math.sinh(x)


def default_threshold(traj) -> float:
    """Population standard deviation of the trajectory. 0.0 signals a flat trajectory."""
    g = np.asarray(traj, dtype=float)
    if g.size < 2:
        raise ContractError("trajectory needs at least 2 values")
    return float(np.std(g))


def support_radius(X, m: MetricKind = MetricKind(), seed: Optional[int] = 0) -> float:
    """Half the dataset diameter under ``m``.

    Exact for N <= 2000.  Larger sets use the best of a few double sweeps
    (random point -> farthest point -> its farthest point), a lower bound on
    the diameter that is usually tight.
    """
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ContractError("need at least 2 points")
    if n <= EXACT_DIAMETER_LIMIT:
        diameter = max_pairwise(values, m)
    else:
        E = m.embed(values)
        rng = np.random.default_rng(seed)
        diameter = 0.0
        for start in rng.choice(n, size=DIAMETER_RESTARTS, replace=False):
            d_a = m.cross(E[start], E)[0]
            b = int(np.argmax(np.where(np.isfinite(d_a), d_a, -1.0)))
            d_b = m.cross(E[b], E)[0]
            finite = np.isfinite(d_b)
            far = float(d_b[finite].max()) + (0.0 if finite.all() else 1.0)
            diameter = max(diameter, far)
    if diameter <= 0:
        raise DegenerateError("all points coincide under the chosen metric; support volume is zero")
    return diameter / 2.0


def estimate_support_volume(X, m: MetricKind = MetricKind(), seed: Optional[int] = 0) -> float:
    """Volume C_L * r**L of the ball whose radius is half the diameter."""
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    r = support_radius(values, m, seed)
    return math.exp(log_unit_ball_volume(values.shape[1]) + values.shape[1] * math.log(r))


def null_for_dataset(X, m: MetricKind = MetricKind(), seed: Optional[int] = 0) -> PoissonNull:
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    return PoissonNull.from_radius(values.shape[0], values.shape[1], support_radius(values, m, seed))
