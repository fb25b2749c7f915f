"""Exact brute-force neighbour queries.

All distances are Euclidean.  Ties are broken by ascending row index, which
makes every query deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .data import DataError, InsufficientSamplesError

__all__ = [
    "NeighborSet",
    "MajorityContext",
    "distances_to",
    "knn_within",
    "knn_other_class",
    "knn_any",
    "knn_table",
    "nearest_majority",
    "majority_density",
    "majority_context",
    "query_knn",
]


@dataclass(frozen=True, eq=False)
class NeighborSet:
    anchor_index: int
    neighbor_indices: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.neighbor_indices)


@dataclass(frozen=True)
class MajorityContext:
    """Nearest majority row of a minority anchor and that row's mean distance
    to the majority class (``density``; larger means sparser)."""

    anchor_index: int
    nearest_majority_index: int
    distance_to_majority: float
    density: float | None = None


def distances_to(points, x):
    return np.sqrt(np.sum((points - x) ** 2, axis=1))


def _nearest(d, candidates, anchor, k):
    dist = distances_to(d.features[candidates], d.features[anchor])
    # stable sort keeps ascending row ids among equal distances
    order = np.argsort(dist, kind="stable")[:k]
    return NeighborSet(int(anchor), candidates[order], dist[order])


def knn_within(d, cls, anchor, k):
    """The ``k`` nearest rows of class ``cls`` to row ``anchor`` (itself excluded)."""
    if d.labels[anchor] != cls:
        raise DataError(f"row {anchor} is not of class {cls}")
    members = d.class_indices(cls)
    others = members[members != anchor]
    if others.size < k:
        raise InsufficientSamplesError(
            f"k={k} neighbours need at least {k + 1} rows of class {cls}, "
            f"found {members.size}"
        )
    return _nearest(d, others, anchor, k)


def knn_other_class(d, cls, anchor, k):
    """The ``k`` nearest rows of class ``cls`` to a row of the other class."""
    if d.labels[anchor] == cls:
        raise DataError(f"row {anchor} is itself of class {cls}")
    members = d.class_indices(cls)
    if members.size < k:
        raise InsufficientSamplesError(
            f"k={k} neighbours need at least {k} rows of class {cls}, found {members.size}"
        )
    return _nearest(d, members, anchor, k)


def _sq_distances(X, rows):
    return cdist(X[rows], X, "sqeuclidean")


def _smallest_k(sq, k):
    """Column ids of the ``k`` smallest entries per row, ties to the lower id."""
    kth = np.partition(sq, k - 1, axis=1)[:, k - 1:k]
    out = np.empty((sq.shape[0], k), dtype=np.int64)
    for i, row in enumerate(sq <= kth):
        cand = np.flatnonzero(row)
        out[i] = cand[np.argsort(sq[i, cand], kind="stable")[:k]]
    return out


def knn_any(d, anchor, k):
    """The ``k`` nearest rows of either class to row ``anchor`` (itself excluded)."""
    if d.n_samples - 1 < k:
        raise InsufficientSamplesError(
            f"k={k} neighbours need at least {k + 1} rows, found {d.n_samples}"
        )
    sq = _sq_distances(d.features, [anchor])
    sq[0, anchor] = np.inf
    order = _smallest_k(sq, k)[0]
    return NeighborSet(int(anchor), order, np.sqrt(sq[0, order]))


def knn_table(d, k, rows=None, chunk_size=256):
    """:func:`knn_any` for many rows at once: an ``(len(rows), k)`` id array."""
    rows = np.arange(d.n_samples) if rows is None else np.asarray(rows, dtype=np.int64)
    if d.n_samples - 1 < k:
        raise InsufficientSamplesError(
            f"k={k} neighbours need at least {k + 1} rows, found {d.n_samples}"
        )
    out = np.empty((rows.size, k), dtype=np.int64)
    for start in range(0, rows.size, chunk_size):
        block = rows[start:start + chunk_size]
        sq = _sq_distances(d.features, block)
        sq[np.arange(block.size), block] = np.inf
        out[start:start + chunk_size] = _smallest_k(sq, k)
    return out


def nearest_majority(d, anchor):
    """Closest majority row to ``anchor``; the lowest row id wins ties."""
    majority = d.class_indices(0)
    if majority.size == 0:
        raise InsufficientSamplesError("majority class is empty")
    dist = distances_to(d.features[majority], d.features[anchor])
    j = int(np.argmin(dist))
    return MajorityContext(int(anchor), int(majority[j]), float(dist[j]))


def majority_density(d, majority_point, denominator="majority"):
    """Mean distance from ``majority_point`` to every majority row.

    The self term (zero) is part of the sum.  ``denominator="majority"``
    divides by the majority count, ``"all"`` by the full row count.
    """
    majority = d.class_indices(0)
    if majority.size < 2:
        raise InsufficientSamplesError(
            f"density needs at least 2 majority rows, found {majority.size}"
        )
    total = distances_to(d.features[majority], d.features[majority_point]).sum()
    if denominator == "majority":
        return float(total / majority.size)
    if denominator == "all":
        return float(total / d.n_samples)
    raise ValueError(f"denominator must be 'majority' or 'all', got {denominator!r}")


def majority_context(d, anchor, denominator="majority"):
    ctx = nearest_majority(d, anchor)
    return replace(ctx, density=majority_density(d, ctx.nearest_majority_index, denominator))


def query_knn(reference, queries, k, chunk_size=512):
    """Indices of the ``k`` nearest ``reference`` rows for each query row.

    Returns an ``(n_queries, k)`` integer array; ties go to the lower index.
    """
    reference = np.asarray(reference, dtype=float)
    queries = np.asarray(queries, dtype=float)
    if k > reference.shape[0]:
        raise InsufficientSamplesError(
            f"k={k} exceeds the {reference.shape[0]} reference rows"
        )
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    for start in range(0, queries.shape[0], chunk_size):
        sq = cdist(queries[start:start + chunk_size], reference, "sqeuclidean")
        out[start:start + chunk_size] = np.argsort(sq, axis=1, kind="stable")[:, :k]
    return out
