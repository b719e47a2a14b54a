"""Seed clusters from a thresholded Prim trajectory.

Vertices connected in sequence while g(i) <= eps share a label.  A run of k
short edges holds k + 1 vertices: the ones it connected plus the parent that
opened it.  Runs smaller than k0 + 1 vertices are treated as chance
clusters and their vertices become noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DegenerateError
from .metrics import MetricKind
from .prim import PrimDescriptor


@dataclass(frozen=True, eq=False)
class SeedClusters:
    members: list
    centroids: np.ndarray
    noise: np.ndarray
    n_points: int
    epsilon: float = float("nan")
    k0: int = 1

    @property
    def K(self) -> int:
        return len(self.members)

    @property
    def sizes(self) -> list[int]:
        return [len(m) for m in self.members]

    def labels(self) -> np.ndarray:
        out = np.full(self.n_points, -1, dtype=int)
        for j, m in enumerate(self.members):
            out[m] = j
        return out

    def summary(self) -> dict:
        return {
            "K": self.K,
            "sizes": self.sizes,
            "centroids": self.centroids.tolist(),
            "epsilon": self.epsilon,
            "k0": self.k0,
            "noise": int(len(self.noise)),
        }


def centroid(members, X, m: MetricKind = MetricKind()) -> np.ndarray:
    """Mean of the members; divergence metrics average the sum-normalized vectors."""
    idx = np.asarray(members, dtype=np.int64)
    if idx.size == 0:
        raise ContractError("centroid of an empty set")
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    pts = values[idx]
    if m.is_divergence:
        pts = m.embed(pts)
    return pts.mean(axis=0)


def find_runs(lengths, epsilon: float) -> list[tuple[int, int]]:
    """Maximal half-open ranges [start, stop) of steps with ``lengths <= epsilon``."""
    below = np.concatenate([[False], np.asarray(lengths) <= epsilon, [False]])
    edges = np.flatnonzero(np.diff(below.astype(np.int8)))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def extract(desc: PrimDescriptor, epsilon: float, k0: int, X, m: MetricKind = MetricKind()) -> SeedClusters:
    """Split a Prim trajectory into seed clusters and noise.

    When the parent opening a run already belongs to an accepted cluster (Prim
    jumped back into an explored region), it stays with that cluster and
    the new run must reach k0 + 1 vertices on its own.
    """
    if not epsilon > 0:
        raise DegenerateError("threshold is zero (flat trajectory); supply epsilon explicitly")
    if k0 < 1:
        raise ContractError("k0 must be >= 1")
    n = desc.n_points
    claimed = np.zeros(n, dtype=bool)
    members = []
    for start, stop in find_runs(desc.lengths, epsilon):
        run = desc.vertices[start:stop].tolist()
        opener = int(desc.parents[start])
        if not claimed[opener]:
            run.insert(0, opener)
        if len(run) >= k0 + 1:
            claimed[run] = True
            members.append(np.array(run, dtype=np.int64))
    in_cluster = np.zeros(n, dtype=bool)
    for mem in members:
        in_cluster[mem] = True
    noise = np.flatnonzero(~in_cluster)
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    if members:
        cents = np.vstack([centroid(mem, values, m) for mem in members])
    else:
        cents = np.empty((0, values.shape[1]))
    return SeedClusters(members, cents, noise, n, float(epsilon), int(k0))
