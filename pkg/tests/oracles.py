"""Independent reference implementations used as test oracles.

Nothing here imports the package under test except for plain data types.
They favour obviousness over speed.
"""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np

mpmath.mp.dps = 50


# ---------------------------------------------------------------- distances

def ref_distance(x, y, tag: str, alpha: float = 0.5) -> float:
    """Scalar-loop dissimilarity, written straight from the definitions."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if tag == "euclidean":
        return math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x, y)))
    if tag == "sam":
        xm = [mpmath.mpf(a) for a in x]
        ym = [mpmath.mpf(b) for b in y]
        dot = mpmath.fsum(a * b for a, b in zip(xm, ym))
        nx = mpmath.sqrt(mpmath.fsum(a * a for a in xm))
        ny = mpmath.sqrt(mpmath.fsum(b * b for b in ym))
        return float(mpmath.acos(min(mpmath.mpf(1), dot / (nx * ny))))
    p = [mpmath.mpf(a) / mpmath.fsum(x) for a in x]
    q = [mpmath.mpf(b) / mpmath.fsum(y) for b in y]
    if tag == "kl":
        total = mpmath.mpf(0)
        for a, b in zip(p, q):
            if a == 0 and b == 0:
                continue
            if a == 0 or b == 0:
                return math.inf
            total += a * mpmath.log(a / b) + b * mpmath.log(b / a)
        return float(total)
    if tag == "renyi":
        al = mpmath.mpf(alpha)
        s1 = mpmath.fsum(a ** al * b ** (1 - al) for a, b in zip(p, q))
        s2 = mpmath.fsum(b ** al * a ** (1 - al) for a, b in zip(p, q))
        return float((mpmath.log(s1) + mpmath.log(s2)) / (al - 1))
    raise ValueError(tag)


def ref_matrix(X, tag: str, alpha: float = 0.5) -> np.ndarray:
    n = len(X)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = ref_distance(X[i], X[j], tag, alpha)
    return M


# ---------------------------------------------------------------- spanning trees

def prufer_to_edges(seq, n):
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(u for u in range(n) if degree[u] == 1)
        edges.append((leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [u for u in range(n) if degree[u] == 1]
    edges.append((u, w))
    return edges


def brute_force_mst_length(M) -> float:
    """Minimum total length over every labelled spanning tree (Cayley enumeration)."""
    n = len(M)
    if n == 2:
        return float(M[0][1])
    best = math.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        total = math.fsum(M[a][b] for a, b in prufer_to_edges(seq, n))
        best = min(best, total)
    return best


# ---------------------------------------------------------------- Poisson model

def mp_false_alarm(k0, x):
    return mpmath.exp(k0 * mpmath.log(1 - mpmath.exp(-mpmath.mpf(x))))


def mp_min_run_length(p_fa, x) -> int:
    """Least integer k >= 1 with (1 - e^-x)^k <= p_fa.

    Brackets the answer with a 50-digit logarithm, then settles it by
    checking k log(1 - e^-x) <= log p_fa on both sides.
    """
    log_q = mpmath.log(1 - mpmath.exp(-mpmath.mpf(x)))
    log_p = mpmath.log(p_fa)
    k = max(1, int(mpmath.ceil(log_p / log_q)) - 2)
    while k > 1 and (k - 1) * log_q <= log_p:
        k -= 1
    while k * log_q > log_p:
        k += 1
    return k


def mp_pmf(k, x):
    e = mpmath.exp(-mpmath.mpf(x))
    return mpmath.exp(k * mpmath.log(1 - e)) * e


def mp_mean_size(x):
    """sum_{k>=1} (k+1) q^k (1-q), using the geometric sums
    sum k q^k = q/(1-q)^2 and sum q^k = q/(1-q)."""
    e = mpmath.exp(-mpmath.mpf(x))
    q = 1 - e
    return e * (q / e ** 2 + q / e)


def mp_unit_ball(L):
    return 2 * mpmath.pi ** (mpmath.mpf(L) / 2) / (L * mpmath.gamma(mpmath.mpf(L) / 2))


def mp_leaf_size(L, eps) -> int:
    return max(1, int(mpmath.ceil(2 * mpmath.erfinv((1 - mpmath.mpf(eps)) ** (mpmath.mpf(1) / L)) ** 2)))


# ---------------------------------------------------------------- validity

def ref_davies_bouldin(X, labels, centroids) -> float:
    ks = sorted({int(k) for k in labels if k >= 0})
    s = {}
    for k in ks:
        pts = [X[i] for i in range(len(X)) if labels[i] == k]
        s[k] = math.fsum(ref_distance(p, centroids[k], "euclidean") for p in pts) / len(pts)
    worst = []
    for i in ks:
        worst.append(max(
            (s[i] + s[j]) / ref_distance(centroids[i], centroids[j], "euclidean") for j in ks if j != i
        ))
    return math.fsum(worst) / len(worst)


def ref_overlap(labels, reference) -> float:
    """Count, for each cluster, points sharing its most frequent class."""
    labels = list(labels)
    reference = list(reference)
    classes = sorted(set(reference))
    hits = 0
    for k in sorted({k for k in labels if k >= 0}):
        counts = [sum(1 for a, b in zip(labels, reference) if a == k and b == c) for c in classes]
        hits += max(counts)
    return hits / len(reference)
