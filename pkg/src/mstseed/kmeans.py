"""Generalized Lloyd iterations with a pluggable dissimilarity.

Euclidean runs minimize squared distances (classic K-means); the other
metrics minimize the metric value itself, with centroids still taken as
(normalized) means.  For the symmetrized divergences that update is a
heuristic, so the objective is watched and the loop stops rather than
accept an increase beyond a small relative slack.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError
from .metrics import EUCLIDEAN, MetricKind, replace_infinite
from .modes import SeedClusters, centroid

log = logging.getLogger(__name__)

DIVERGENCE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ClusterModel:
    labels: np.ndarray
    centroids: np.ndarray
    objective: float
    iterations: int
    converged: bool
    history: tuple = ()
    diagnostic: str = ""

    @property
    def K(self) -> int:
        return self.centroids.shape[0]


def point_costs(E: np.ndarray, C: np.ndarray, m: MetricKind) -> np.ndarray:
    """(N, K) assignment costs between embedded points and centroids."""
    D = replace_infinite(m.cross(E, m.embed(C) if m.tag != EUCLIDEAN else C))
    return D ** 2 if m.tag == EUCLIDEAN else D


def _objective(costs: np.ndarray, labels: np.ndarray) -> float:
    return float(costs[np.arange(len(labels)), labels].sum())


def lloyd(
    X,
    init,
    m: MetricKind = MetricKind(),
    max_iter: int = 100,
    tol: Optional[float] = None,
) -> ClusterModel:
    """Refine a partition starting from seed centroids.

    ``init`` is a :class:`SeedClusters` or a (K, L) array of centroids.
    Iterates assign/update until labels stop changing, the objective gain
    drops below ``tol`` (default 1e-8 times the initial objective), or
    ``max_iter`` updates were made.  An emptied cluster is re-seeded with the
    point farthest from its current centroid.
    """
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    C = np.array(init.centroids if isinstance(init, SeedClusters) else init, dtype=float, ndmin=2)
    n, K = values.shape[0], C.shape[0]
    if K < 1:
        raise ContractError("need at least one seed cluster")
    if K > n:
        raise ContractError(f"K={K} exceeds the number of points N={n}")
    if max_iter < 1:
        raise ContractError("max_iter must be >= 1")
    E = m.embed(values)

    costs = point_costs(E, C, m)
    labels = np.argmin(costs, axis=1)
    initial = _objective(costs, labels)
    if tol is None:
        tol = 1e-8 * initial
    if tol < 0:
        raise ContractError("tol must be >= 0")

    history = []
    current = initial
    converged = False
    diagnostic = ""
    it = 0
    fit_labels = labels
    while it < max_iter:
        labels = _repair_empty(labels, costs, K)
        new_C, new_costs = _update(values, E, labels, K, m)
        obj = _objective(new_costs, labels)
        if _rose(obj, current):
            diagnostic = f"objective rose from {current!r} to {obj!r} at iteration {it + 1}; kept previous state"
            log.warning(diagnostic)
            break
        C, costs = new_C, new_costs
        fit_labels = labels
        it += 1
        history.append(obj)
        new_labels = np.argmin(costs, axis=1)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        assigned = _objective(costs, new_labels)
        gain = current - assigned
        current = assigned
        labels = new_labels
        if gain < tol:
            # final update so the centroids match the returned labels
            labels = _repair_empty(labels, costs, K)
            new_C, new_costs = _update(values, E, labels, K, m)
            obj = _objective(new_costs, labels)
            if _rose(obj, current):
                diagnostic = f"final update raised the objective to {obj!r}; centroids lag one assignment"
                log.warning(diagnostic)
            else:
                C, costs = new_C, new_costs
                fit_labels = labels
                history.append(obj)
                converged = True
            break
    if it > 0:
        # return the partition the centroids were computed from
        labels = fit_labels

    return ClusterModel(
        labels=labels.astype(int),
        centroids=C,
        objective=_objective(costs, labels),
        iterations=it,
        converged=converged,
        history=tuple(history),
        diagnostic=diagnostic,
    )


def _update(values, E, labels, K, m):
    C = np.vstack([centroid(np.flatnonzero(labels == j), values, m) for j in range(K)])
    return C, point_costs(E, C, m)


def _rose(new: float, old: float) -> bool:
    return new > old + DIVERGENCE_SLACK * abs(old) + 1e-12


def _repair_empty(labels: np.ndarray, costs: np.ndarray, K: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=K)
    if counts.min() > 0:
        return labels
    labels = labels.copy()
    for j in np.flatnonzero(counts == 0):
        own = costs[np.arange(len(labels)), labels]
        counts = np.bincount(labels, minlength=K)
        own[counts[labels] <= 1] = -np.inf  # never empty another cluster
        far = int(np.argmax(own))
        labels[far] = j
    return labels


def random_init(X, K: int, seed: int = 0, m: MetricKind = MetricKind()) -> SeedClusters:
    """K distinct points drawn uniformly as singleton seeds."""
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    n = values.shape[0]
    if not 1 <= K <= n:
        raise ContractError(f"need 1 <= K <= N, got K={K}, N={n}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(n, size=K, replace=False)
    members = [np.array([p], dtype=np.int64) for p in picks]
    cents = np.vstack([centroid(mem, values, m) for mem in members])
    noise = np.setdiff1d(np.arange(n), picks)
    return SeedClusters(members, cents, noise, n)
