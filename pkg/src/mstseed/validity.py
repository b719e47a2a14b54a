"""Partition quality: Davies-Bouldin index and overlap score against a reference."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateError
from .metrics import MetricKind, replace_infinite
from .modes import centroid


@dataclass(frozen=True, eq=False)
class ValidityReport:
    db_index: float
    score: float
    confusion: np.ndarray
    classes: list
    per_class_scores: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "db_index": self.db_index,
            "score": self.score,
            "classes": self.classes,
            "per_class_scores": self.per_class_scores,
            "confusion": self.confusion.tolist(),
        }


def davies_bouldin(X, labels, m: MetricKind = MetricKind(), centroids=None) -> float:
    """Mean over clusters of max_j (s_i + s_j) / d(mu_i, mu_j).

    s_i is the mean dissimilarity of cluster i's points to its centroid.
    Points labeled -1 are ignored.  Centroids default to the (normalized)
    cluster means.
    """
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if labels.shape != (values.shape[0],):
        raise ContractError("one label per point required")
    ks = np.unique(labels[labels >= 0])
    if ks.size < 2:
        raise ContractError("Davies-Bouldin needs at least two clusters")
    if centroids is None:
        centroids = np.vstack([centroid(np.flatnonzero(labels == k), values, m) for k in ks])
    else:
        centroids = np.asarray(centroids, dtype=float)[ks]
    C = m.embed(centroids)
    E = m.embed(values)
    spread = np.array([
        replace_infinite(m.cross(E[labels == k], C[j])[:, 0]).mean() for j, k in enumerate(ks)
    ])
    sep = m.cross(C, C)
    K = ks.size
    worst = np.empty(K)
    for i in range(K):
        ratios = []
        for j in range(K):
            if j == i:
                continue
            if sep[i, j] == 0:
                raise DegenerateError(f"clusters {ks[i]} and {ks[j]} have coincident centroids")
            ratios.append((spread[i] + spread[j]) / sep[i, j])
        worst[i] = max(ratios)
    return float(worst.mean())


def overlap_score(labels, reference):
    """Fraction of points whose cluster maps to their reference class.

    Each cluster is mapped to the reference class it overlaps most (ties to
    the lowest class).  Several clusters may map to one class; all of their
    overlaps count.  Unassigned points (-1) count as misses.

    Returns ``(score, confusion, classes, per_class)`` where ``confusion`` has
    one row per cluster id 0..K-1 and one column per reference class.
    """
    labels = np.asarray(labels)
    reference = np.asarray(reference)
    if labels.shape != reference.shape:
        raise ContractError(f"labels ({labels.size}) and reference ({reference.size}) differ in length")
    classes, ref_idx = np.unique(reference, return_inverse=True)
    K = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    confusion = np.zeros((K, classes.size), dtype=np.int64)
    ok = labels >= 0
    np.add.at(confusion, (labels[ok], ref_idx[ok]), 1)
    hits = np.zeros(classes.size, dtype=np.int64)
    for row in confusion:
        if row.sum():
            hits[int(np.argmax(row))] += row.max()
    totals = np.bincount(ref_idx, minlength=classes.size)
    score = float(hits.sum() / reference.size) if reference.size else 0.0
    per_class = (hits / np.maximum(totals, 1)).tolist()
    return score, confusion, classes.tolist(), per_class


def validity_report(X, labels, reference=None, m: MetricKind = MetricKind(), centroids=None) -> ValidityReport:
    labels = np.asarray(labels)
    try:
        db = davies_bouldin(X, labels, m, centroids)
    except ContractError:
        db = float("nan")
    if reference is None:
        return ValidityReport(db, float("nan"), np.zeros((0, 0), dtype=np.int64), [], [])
    score, confusion, classes, per_class = overlap_score(labels, reference)
    return ValidityReport(db, score, confusion, classes, per_class)
