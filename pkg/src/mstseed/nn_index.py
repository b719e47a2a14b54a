"""Median-split hierarchical index and the nearest-neighbor MST built on it.

Cells are split level by level at the sample median of the axis with the
largest spread, until they are small enough or too small for a reliable
median.  Distances are then evaluated only between points of the same or
touching terminal cells; a minimum spanning tree over those candidate edges
approximates the exact MST at a fraction of the N(N-1)/2 cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import erfinv

from .errors import ContractError
from .metrics import EUCLIDEAN, MetricKind
from .prim import PrimDescriptor, prim_from_edges

SPLIT = 0
TERMINAL = 1
SMALL = 10


def min_leaf_size(L: int, epsilon_conf: float) -> int:
    """Smallest cell population for which splitting at the sample median is trusted.

    A cell of n points may be split when n >= 2 * erfinv((1 - eps)**(1/L))**2,
    i.e. when the Gaussian approximation of all L sample medians puts less
    than ``eps`` probability outside the cell.
    """
    if L < 1:
        raise ContractError("dimension must be >= 1")
    if not 0.0 < epsilon_conf < 1.0:
        raise ContractError("epsilon_conf must lie in (0, 1)")
    rhs = 2.0 * float(erfinv((1.0 - epsilon_conf) ** (1.0 / L))) ** 2
    return max(1, math.ceil(rhs))


@dataclass(frozen=True)
class IndexParams:
    epsilon_conf: float = 0.05
    sample_size: int = 4096
    target_leaf_occupancy: int = 32
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon_conf < 1.0:
            raise ContractError("epsilon_conf must lie in (0, 1)")
        if self.sample_size < 1:
            raise ContractError("sample_size must be >= 1")
        if self.target_leaf_occupancy < 2:
            raise ContractError("target_leaf_occupancy must be >= 2")


@dataclass
class SpatialIndexNode:
    output: np.ndarray
    status: int
    parent: int
    child: tuple
    depth: int
    card: int
    lower: np.ndarray
    upper: np.ndarray
    split_axis: int = -1
    split_threshold: float = float("nan")
    points: np.ndarray = field(default=None, repr=False)


class SpatialIndex:
    """Descriptor table over a fixed point array (rows are the points)."""

    def __init__(self, points, params: IndexParams = IndexParams()):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ContractError("index needs a non-empty (N, L) array")
        self.params = params
        self.n_min = min_leaf_size(self.points.shape[1], params.epsilon_conf)
        self.nodes: list[SpatialIndexNode] = []
        self._rng = np.random.default_rng(params.seed)
        self._build()
        self.leaves = np.array([i for i, nd in enumerate(self.nodes) if nd.status != SPLIT], dtype=np.int64)
        self.leaf_of = np.empty(self.points.shape[0], dtype=np.int64)
        for leaf in self.leaves:
            self.leaf_of[self.nodes[leaf].points] = leaf
        self._adjacency = None

    def _build(self):
        X = self.points
        idx = np.arange(X.shape[0])
        lo, hi = X.min(axis=0), X.max(axis=0)
        self.nodes.append(self._node(idx, parent=-1, depth=0, lower=lo, upper=hi))
        level = [0]
        while level:
            nxt = []
            for k in level:
                nd = self.nodes[k]
                nd.status = self._status(nd)
                if nd.status != SPLIT:
                    continue
                nxt.extend(self._split(k))
            level = nxt

    def _node(self, idx, parent, depth, lower, upper):
        X = self.points[idx]
        output = X.mean(axis=0) if idx.size else np.full(self.points.shape[1], np.nan)
        return SpatialIndexNode(output, SPLIT, parent, (-1, -1), depth, int(idx.size), lower, upper, points=idx)

    def _status(self, nd: SpatialIndexNode) -> int:
        if nd.card == 0 or nd.card < self.n_min:
            return SMALL
        if nd.card <= self.params.target_leaf_occupancy:
            return TERMINAL
        X = self.points[nd.points]
        if np.all(X.max(axis=0) == X.min(axis=0)):
            return TERMINAL
        return SPLIT

    def _split(self, k: int) -> list[int]:
        nd = self.nodes[k]
        X = self.points[nd.points]
        spread = X.max(axis=0) - X.min(axis=0)
        axis = int(np.argmax(spread))
        col = X[:, axis]
        R = self.params.sample_size
        sample = col if col.size <= R else col[self._rng.choice(col.size, size=R, replace=False)]
        t = float(np.median(sample))
        left = col <= t
        if left.all() or not left.any():
            t = 0.5 * (float(col.min()) + float(col.max()))
            left = col <= t
            if left.all():
                t = float(np.unique(col)[-2])
                left = col <= t
        nd.split_axis = axis
        nd.split_threshold = t
        l_hi = nd.upper.copy()
        l_hi[axis] = t
        r_lo = nd.lower.copy()
        r_lo[axis] = t
        children = []
        for mask, lo, hi in ((left, nd.lower, l_hi), (~left, r_lo, nd.upper)):
            self.nodes.append(self._node(nd.points[mask], k, nd.depth + 1, lo, hi))
            children.append(len(self.nodes) - 1)
        nd.child = tuple(children)
        return children

    # -- queries -------------------------------------------------------

    def locate(self, v) -> int:
        """Terminal node containing the position ``v``."""
        v = np.asarray(v, dtype=float)
        k = 0
        while self.nodes[k].status == SPLIT:
            nd = self.nodes[k]
            k = nd.child[0] if v[nd.split_axis] <= nd.split_threshold else nd.child[1]
        return k

    @property
    def adjacency(self) -> dict:
        """Map leaf node -> sorted array of leaf nodes whose boxes touch it (itself included)."""
        if self._adjacency is None:
            lo = np.vstack([self.nodes[k].lower for k in self.leaves])
            hi = np.vstack([self.nodes[k].upper for k in self.leaves])
            adj = {}
            for a, leaf in enumerate(self.leaves):
                touch = np.all((lo <= hi[a]) & (lo[a] <= hi), axis=1)
                adj[int(leaf)] = self.leaves[touch]
            self._adjacency = adj
        return self._adjacency

    def neighbor_cells(self, leaf: int) -> np.ndarray:
        return self.adjacency[int(leaf)]

    def candidate_neighbors(self, i: int) -> np.ndarray:
        """Indices of points sharing or touching point ``i``'s terminal cell, ``i`` excluded."""
        cells = self.neighbor_cells(self.leaf_of[i])
        idx = np.concatenate([self.nodes[c].points for c in cells])
        return np.sort(idx[idx != i])

    def candidates_for(self, v) -> np.ndarray:
        """Candidate set for an arbitrary position ``v``."""
        cells = self.neighbor_cells(self.locate(v))
        return np.sort(np.concatenate([self.nodes[c].points for c in cells]))

    def check(self) -> None:
        """Assert the structural invariants of the descriptor table."""
        for k, nd in enumerate(self.nodes):
            if nd.status == SPLIT:
                a, b = nd.child
                ca, cb = self.nodes[a], self.nodes[b]
                assert ca.parent == k and cb.parent == k
                assert ca.card + cb.card == nd.card
                assert np.array_equal(np.sort(np.concatenate([ca.points, cb.points])), np.sort(nd.points))
                for c in (ca, cb):
                    assert np.all(c.lower >= nd.lower) and np.all(c.upper <= nd.upper)
            else:
                assert nd.child == (-1, -1)
        counts = np.zeros(self.points.shape[0], dtype=int)
        for leaf in self.leaves:
            counts[self.nodes[leaf].points] += 1
        assert np.all(counts == 1)

    def to_csv(self, path) -> None:
        L = self.points.shape[1]
        with open(Path(path), "w", encoding="utf-8") as fh:
            head = ["node"] + [f"output_{j}" for j in range(L)]
            head += ["status", "parent", "child_1", "child_2", "depth", "card", "split_axis", "split_threshold"]
            fh.write(",".join(head) + "\n")
            for k, nd in enumerate(self.nodes):
                row = [str(k)] + [repr(float(x)) for x in nd.output]
                row += [str(nd.status), str(nd.parent), str(nd.child[0]), str(nd.child[1]),
                        str(nd.depth), str(nd.card), str(nd.split_axis), repr(nd.split_threshold)]
                fh.write(",".join(row) + "\n")


def build_index(X, params: IndexParams = IndexParams(), m: MetricKind = MetricKind()) -> SpatialIndex:
    """Index the points in the representation the metric compares."""
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    return SpatialIndex(m.embed(values), params)


@dataclass
class NNMstResult:
    descriptor: PrimDescriptor
    index: SpatialIndex
    evaluations: int
    candidate_edges: int
    components_before_repair: int


def candidate_edges(index: SpatialIndex, m: MetricKind):
    """All distances between points in the same or touching leaves, each pair once."""
    E = index.points
    rows, cols, ws = [], [], []
    for a in index.leaves.tolist():
        pa = index.nodes[a].points
        if pa.size == 0:
            continue
        for b in index.neighbor_cells(a).tolist():
            if b < a:
                continue
            pb = index.nodes[b].points
            if pb.size == 0:
                continue
            D = m.cross(E[pa], E[pb])
            if a == b:
                iu, ju = np.triu_indices(pa.size, k=1)
                rows.append(pa[iu])
                cols.append(pa[ju])
                ws.append(D[iu, ju])
            else:
                rows.append(np.repeat(pa, pb.size))
                cols.append(np.tile(pb, pa.size))
                ws.append(D.ravel())
    if not rows:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(ws)


def connect_components(E, rows, cols, ws, m: MetricKind):
    """Add edges until the candidate graph is connected.

    Repeatedly takes the two components with the closest mean points and
    joins them by an exact edge: the point of the first nearest to the
    second's mean, to its nearest point in the second.  Returns the extra
    edges, the number of distance evaluations spent, and the initial
    component count.
    """
    n = E.shape[0]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_comp, comp = connected_components(graph, directed=False)
    extra_r, extra_c, extra_w = [], [], []
    evaluations = 0
    if n_comp == 1:
        return extra_r, extra_c, extra_w, evaluations, n_comp

    def rep(members):
        mean = E[members].mean(axis=0)
        return mean if m.tag == EUCLIDEAN else m.embed(mean)[0]

    groups = {c: np.flatnonzero(comp == c) for c in range(n_comp)}
    reps = {c: rep(g) for c, g in groups.items()}
    while len(groups) > 1:
        keys = sorted(groups)
        R = np.vstack([reps[c] for c in keys])
        D = m.cross(R, R)
        evaluations += len(keys) * (len(keys) - 1) // 2
        np.fill_diagonal(D, np.inf)
        D[~np.isfinite(D)] = np.inf
        flat = int(np.argmin(D))
        ia, ib = divmod(flat, len(keys))
        if not np.isfinite(D[ia, ib]):
            ia, ib = 0, 1
        A, B = keys[ia], keys[ib]
        ga, gb = groups[A], groups[B]
        da = m.cross(E[ga], reps[B])[:, 0]
        a = int(ga[np.argmin(np.where(np.isfinite(da), da, np.inf))])
        db = m.cross(E[a], E[gb])[0]
        j = int(np.argmin(np.where(np.isfinite(db), db, np.inf)))
        evaluations += ga.size + gb.size
        extra_r.append(a)
        extra_c.append(int(gb[j]))
        extra_w.append(float(db[j]))
        merged = np.concatenate([ga, gb])
        del groups[B], reps[B]
        groups[A] = merged
        reps[A] = rep(merged)
    return extra_r, extra_c, extra_w, evaluations, n_comp


def nn_mst(X, m: MetricKind = MetricKind(), params: IndexParams = IndexParams(), root: int = 0) -> NNMstResult:
    """Approximate MST restricted to neighboring cells, with its Prim trajectory."""
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ContractError("need at least 2 points")
    index = build_index(values, params, m)
    E = index.points
    rows, cols, ws = candidate_edges(index, m)
    evaluations = len(ws)
    er, ec, ew, extra_evals, n_comp = connect_components(E, rows, cols, ws, m)
    evaluations += extra_evals
    rows = np.concatenate([rows, np.asarray(er, dtype=np.int64)])
    cols = np.concatenate([cols, np.asarray(ec, dtype=np.int64)])
    ws = np.concatenate([ws, np.asarray(ew, dtype=float)])
    inf = np.isinf(ws)
    if inf.any():
        finite = ws[~inf]
        ws[inf] = 1.0 + (finite.max() if finite.size else 0.0)
    desc = prim_from_edges(n, rows, cols, ws, root)
    return NNMstResult(desc, index, evaluations, len(rows), n_comp)
