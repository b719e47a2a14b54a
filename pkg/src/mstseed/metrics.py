"""Dissimilarities between feature vectors.

Four measures are available: Euclidean distance, spectral angle (SAM), and
the symmetrized Kullback-Leibler and Renyi-alpha divergences between
sum-normalized vectors.  All of them are exactly symmetric in floating point.

Internally points are first *embedded* (divergences: divided by their sum;
SAM: divided by their Euclidean norm) and the kernels work on embedded rows,
so a dataset is normalized once rather than once per pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractError, DomainError

EUCLIDEAN = "euclidean"
SAM = "sam"
KL = "kl"
RENYI = "renyi"

_ALIASES = {
    "euclidean": EUCLIDEAN,
    "sam": SAM,
    "kl": KL,
    "kullback_leibler_sym": KL,
    "kullback-leibler": KL,
    "renyi": RENYI,
    "renyi_sym": RENYI,
}

# max elements of a temporary (rows, cols, L) block
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class MetricKind:
    tag: str = EUCLIDEAN
    alpha: Optional[float] = None

    def __post_init__(self):
        tag = _ALIASES.get(str(self.tag).lower())
        if tag is None:
            raise ConfigError(f"unknown metric {self.tag!r}; choose from euclidean, sam, kl, renyi")
        object.__setattr__(self, "tag", tag)
        if tag == RENYI:
            alpha = 0.5 if self.alpha is None else float(self.alpha)
            if not 0.0 < alpha < 1.0:
                raise ConfigError(f"renyi alpha must lie in (0, 1), got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.alpha is not None:
            raise ConfigError(f"alpha only applies to the renyi metric, not {tag}")

    @classmethod
    def parse(cls, name: str, alpha: Optional[float] = None) -> "MetricKind":
        tag = _ALIASES.get(str(name).lower())
        return cls(name, alpha if tag == RENYI else None)

    @property
    def is_divergence(self) -> bool:
        return self.tag in (KL, RENYI)

    @property
    def needs_nonnegative(self) -> bool:
        return self.tag != EUCLIDEAN

    def __str__(self):
        return f"renyi(alpha={self.alpha})" if self.tag == RENYI else self.tag

    def embed(self, X) -> np.ndarray:
        """Map raw points to the representation the kernels operate on."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if self.tag == EUCLIDEAN:
            return X
        _check_nonnegative(X)
        if self.tag == SAM:
            return X / np.linalg.norm(X, axis=1, keepdims=True)
        return normalize_rows(X)

    def cross(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Dissimilarities between embedded rows of ``A`` and ``B``, shape (len A, len B).

        One-sided zero coordinates make the divergences infinite; callers
        building graphs replace those entries (see :func:`pairwise_matrix`).
        """
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        if A.shape[1] != B.shape[1]:
            raise ContractError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
        out = np.empty((A.shape[0], B.shape[0]))
        step = max(1, _BLOCK_ELEMENTS // max(1, B.shape[0] * A.shape[1]))
        for i0 in range(0, A.shape[0], step):
            out[i0:i0 + step] = self._kernel(A[i0:i0 + step], B)
        return out

    def _kernel(self, A, B):
        a = A[:, None, :]
        b = B[None, :, :]
        if self.tag == EUCLIDEAN:
            return np.sqrt(((a - b) ** 2).sum(axis=-1))
        if self.tag == SAM:
            # 2*atan2(|a-b|, |a+b|) == arccos(<a,b>) for unit vectors, without
            # the loss of precision arccos has near 0
            num = np.sqrt(((a - b) ** 2).sum(axis=-1))
            den = np.sqrt(((a + b) ** 2).sum(axis=-1))
            return 2.0 * np.arctan2(num, den)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.tag == KL:
                la = np.log(A)[:, None, :]
                lb = np.log(B)[None, :, :]
                terms = (a - b) * (la - lb)
                terms[(a == 0) & (b == 0)] = 0.0
                return terms.sum(axis=-1)
            alpha = self.alpha
            s1 = ((A ** alpha)[:, None, :] * (B ** (1.0 - alpha))[None, :, :]).sum(axis=-1)
            s2 = ((B ** alpha)[None, :, :] * (A ** (1.0 - alpha))[:, None, :]).sum(axis=-1)
            d = (np.log(s1) + np.log(s2)) / (alpha - 1.0)
        d = np.maximum(d, 0.0)
        d[np.all(a == b, axis=-1)] = 0.0
        return d


def _check_nonnegative(X: np.ndarray) -> None:
    bad = np.flatnonzero(np.any(X < 0, axis=1) | ~np.all(np.isfinite(X), axis=1))
    if bad.size:
        raise DomainError(f"vector {bad[0]} has negative or non-finite components")
    zero = np.flatnonzero(X.sum(axis=1) <= 0)
    if zero.size:
        raise DomainError(f"vector {zero[0]} sums to zero")


def normalize(x) -> np.ndarray:
    """Divide a nonnegative vector by its sum."""
    return normalize_rows(np.asarray(x, dtype=float)[None, :])[0]


def normalize_rows(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    _check_nonnegative(X)
    return X / X.sum(axis=1, keepdims=True)


def distance(x, y, m: MetricKind = MetricKind()) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ContractError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(m.cross(m.embed(x), m.embed(y))[0, 0])


def replace_infinite(values: np.ndarray) -> np.ndarray:
    """Swap +inf divergences for 1 + the largest finite value, in place."""
    inf = np.isinf(values)
    if inf.any():
        finite = values[~inf]
        values[inf] = 1.0 + (finite.max() if finite.size else 0.0)
    return values


def pairwise_matrix(X, m: MetricKind = MetricKind(), embedded: bool = False) -> np.ndarray:
    """Symmetric N x N dissimilarity matrix with zero diagonal.

    Entry (i, j) is computed once and mirrored, so the result is exactly
    symmetric.  Infinite divergences are replaced by one plus the largest
    finite entry.
    """
    if hasattr(X, "values"):
        X = X.values
    E = np.asarray(X, dtype=float) if embedded else m.embed(X)
    n = E.shape[0]
    M = np.zeros((n, n))
    step = max(1, _BLOCK_ELEMENTS // max(1, n * E.shape[1]))
    for i0 in range(0, n, step):
        i1 = min(n, i0 + step)
        block = m.cross(E[i0:i1], E[i0:])
        for r in range(i1 - i0):
            i = i0 + r
            row = block[r, r + 1:]
            M[i, i + 1:] = row
            M[i + 1:, i] = row
    np.fill_diagonal(M, 0.0)
    return replace_infinite(M)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def max_pairwise(X, m: MetricKind) -> float:
    """Largest dissimilarity over all pairs (exact, O(N^2)).

    Infinite divergences count as one plus the largest finite value, as in
    :func:`pairwise_matrix`.
    """
    E = m.embed(X.values if hasattr(X, "values") else X)
    best = 0.0
    saw_inf = False
    n = E.shape[0]
    step = max(1, _BLOCK_ELEMENTS // max(1, n * E.shape[1]))
    for i0 in range(0, n, step):
        block = m.cross(E[i0:i0 + step], E[i0:])
        finite = np.isfinite(block)
        saw_inf |= not finite.all()
        if finite.any():
            best = max(best, float(block[finite].max()))
    return best + 1.0 if saw_inf else best
