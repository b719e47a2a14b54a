"""Prim's algorithm with a recorded construction trajectory.

The trajectory g(i) is the length of the edge added at iteration i.  Its
valleys are the dense regions the tree walks through; long edges mark the
jumps between clusters.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class MstSummary:
    total_length: float
    edge_lengths: np.ndarray


@dataclass(frozen=True, eq=False)
class PrimDescriptor:
    """Iteration ``i`` (0-based here) connected ``vertices[i]`` to ``parents[i]``
    with an edge of length ``lengths[i]``."""

    root: int
    vertices: np.ndarray
    parents: np.ndarray
    lengths: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.vertices) + 1

    @property
    def trajectory(self) -> np.ndarray:
        return self.lengths

    @property
    def total_length(self) -> float:
        return math.fsum(self.lengths.tolist())

    def summary(self) -> MstSummary:
        return MstSummary(self.total_length, np.sort(self.lengths))

    def edges(self) -> list[tuple[int, int]]:
        return [(int(v), int(p)) for v, p in zip(self.vertices, self.parents)]

    def steps(self):
        """Yield ``(iteration, vertex, parent, length)`` with 1-based iterations."""
        for i, (v, p, g) in enumerate(zip(self.vertices, self.parents, self.lengths), start=1):
            yield i, int(v), int(p), float(g)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as fh:
            fh.write("iteration,vertex,parent,length\n")
            for i, v, p, g in self.steps():
                fh.write(f"{i},{v},{p},{g!r}\n")

    def __eq__(self, other):
        if not isinstance(other, PrimDescriptor):
            return NotImplemented
        return (
            self.root == other.root
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.parents, other.parents)
            and np.array_equal(self.lengths, other.lengths)
        )

    __hash__ = None


def trajectory(desc: PrimDescriptor) -> np.ndarray:
    return desc.trajectory


def _check_matrix(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"dissimilarity matrix must be square, got {M.shape}")
    if M.shape[0] < 2:
        raise ContractError("need at least 2 vertices")
    if not np.all(np.isfinite(M)):
        raise ContractError("dissimilarity matrix has non-finite entries")
    if not np.array_equal(M, M.T):
        raise ContractError("dissimilarity matrix is not symmetric")
    if np.any(np.diag(M) != 0):
        raise ContractError("dissimilarity matrix has a non-zero diagonal")


def prim(matrix, root: int = 0) -> PrimDescriptor:
    """Dense O(N^2) Prim on a full dissimilarity matrix.

    Each iteration adds the shortest edge between the tree and the rest;
    ties go to the smallest unconnected vertex, then the smallest parent.
    """
    M = np.asarray(matrix, dtype=float)
    _check_matrix(M)
    n = M.shape[0]
    if not 0 <= root < n:
        raise ContractError(f"root {root} out of range")

    connected = np.zeros(n, dtype=bool)
    connected[root] = True
    best = M[root].copy()
    parent = np.full(n, root, dtype=np.int64)
    best[root] = np.inf

    vertices = np.empty(n - 1, dtype=np.int64)
    parents = np.empty(n - 1, dtype=np.int64)
    lengths = np.empty(n - 1)
    for it in range(n - 1):
        v = int(np.argmin(best))
        vertices[it] = v
        parents[it] = parent[v]
        lengths[it] = best[v]
        connected[v] = True
        best[v] = np.inf
        row = M[v]
        better = ~connected & ((row < best) | ((row == best) & (v < parent)))
        best[better] = row[better]
        parent[better] = v
    return PrimDescriptor(root, vertices, parents, lengths)


def prim_from_edges(n: int, rows, cols, weights, root: int = 0) -> PrimDescriptor:
    """Prim on a sparse undirected graph given as an edge list.

    Uses a lazy binary heap keyed on ``(length, vertex, parent)``, which
    reproduces the tie rule of :func:`prim`.  Raises if the graph is not
    connected.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    weights = np.asarray(weights, dtype=float)
    if n < 2:
        raise ContractError("need at least 2 vertices")
    if not np.all(np.isfinite(weights)):
        raise ContractError("edge weights must be finite")

    order = np.argsort(np.concatenate([rows, cols]), kind="stable")
    src = np.concatenate([rows, cols])[order]
    dst = np.concatenate([cols, rows])[order]
    w = np.concatenate([weights, weights])[order]
    starts = np.searchsorted(src, np.arange(n + 1))
    dst_l, w_l = dst.tolist(), w.tolist()

    connected = [False] * n
    heap: list[tuple[float, int, int]] = []

    def push_from(u):
        for k in range(starts[u], starts[u + 1]):
            v = dst_l[k]
            if not connected[v]:
                heapq.heappush(heap, (w_l[k], v, u))

    connected[root] = True
    push_from(root)
    vertices, parents, lengths = [], [], []
    while heap and len(vertices) < n - 1:
        g, v, p = heapq.heappop(heap)
        if connected[v]:
            continue
        connected[v] = True
        vertices.append(v)
        parents.append(p)
        lengths.append(g)
        push_from(v)
    if len(vertices) != n - 1:
        raise ContractError("edge set does not span all vertices")
    return PrimDescriptor(
        root,
        np.array(vertices, dtype=np.int64),
        np.array(parents, dtype=np.int64),
        np.array(lengths, dtype=float),
    )
