"""Reference resamplers: SMOTE, SMOTE-Tomek, ADASYN, SMOTE-ENN, Borderline-SMOTE.

Each synthetic row is stored with the same provenance layout as PO-QG:
``point = q1 * X[proxima] + q2 * X[orion]`` with ``proxima`` the anchor,
``orion`` the interpolation partner and ``q2`` the gap.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .base import BaseResampler, ConfigError, Resampled, SyntheticBatch
from .data import DataError, InsufficientSamplesError, stats
from .neighbors import knn_other_class, knn_table, knn_within

__all__ = [
    "BaselineConfig",
    "smote",
    "tomek_mask",
    "tomek_remove",
    "adasyn_allocation",
    "adasyn",
    "enn_mask",
    "enn_clean",
    "borderline_categories",
    "borderline_smote",
    "smote_tomek",
    "smote_enn",
    "largest_remainder",
    "SMOTE",
    "SMOTETomek",
    "ADASYN",
    "SMOTEENN",
    "BorderlineSMOTE",
]

METHODS = ("smote", "smote_tomek", "adasyn", "smote_enn", "borderline_smote")
_KINDS = {"borderline1": "borderline1", "borderline-1": "borderline1",
          "borderline2": "borderline2", "borderline-2": "borderline2"}


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "smote"
    k_neighbors: int = 5
    borderline_kind: str = "borderline2"
    m_neighbors: int = 10
    enn_neighbors: int = 3
    seed: int | None = 0
    sampling_strategy: str = "auto"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown baseline {self.method!r}; choose from {METHODS}")
        for name in ("k_neighbors", "m_neighbors", "enn_neighbors"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.borderline_kind not in _KINDS:
            raise ConfigError(f"unknown borderline kind {self.borderline_kind!r}")
        object.__setattr__(self, "borderline_kind", _KINDS[self.borderline_kind])
        if self.sampling_strategy != "auto":
            raise ConfigError("only sampling_strategy='auto' is supported")


def _rng(cfg, rng):
    return np.random.default_rng(cfg.seed) if rng is None else rng


def _deficit(d, k):
    st = stats(d)
    if st.n_minority < k + 1:
        raise InsufficientSamplesError(
            f"k_neighbors={k} needs at least {k + 1} minority rows, found {st.n_minority}"
        )
    return max(st.n_majority - st.n_minority, 0)


def _interpolated(d, anchors, partners, gaps, cfg, info=None):
    X = d.features
    anchors = np.asarray(anchors, dtype=np.int64)
    partners = np.asarray(partners, dtype=np.int64)
    gaps = np.asarray(gaps, dtype=float)
    points = X[anchors] + gaps[:, None] * (X[partners] - X[anchors])
    batch = SyntheticBatch.from_records(
        points, anchors, anchors, partners, 1.0 - gaps, gaps, d.n_features,
        method=cfg.method, config=asdict(cfg), info=info,
    )
    return Resampled.from_generation(d, batch)


def _minority_neighbors(d, k):
    minority = d.class_indices(1)
    return minority, np.array([knn_within(d, 1, a, k).neighbor_indices for a in minority])


def smote(d, cfg, rng=None):
    """Uniform anchor, uniform partner among its ``k`` minority neighbours,
    gap ~ U[0, 1]."""
    n_new = _deficit(d, cfg.k_neighbors)
    rng = _rng(cfg, rng)
    minority, nbrs = _minority_neighbors(d, cfg.k_neighbors)
    slots = rng.integers(minority.size, size=n_new)
    cols = rng.integers(cfg.k_neighbors, size=n_new)
    gaps = rng.random(n_new)
    return _interpolated(d, minority[slots], nbrs[slots, cols], gaps, cfg)


def tomek_mask(d):
    """Keep-mask dropping the majority member of every Tomek link."""
    stats(d)
    nn = knn_table(d, 1)[:, 0]
    y = d.labels
    linked = (y != y[nn]) & (nn[nn] == np.arange(d.n_samples))
    return ~(linked & (y == 0))


def tomek_remove(d):
    return d.subset(np.flatnonzero(tomek_mask(d)))


def largest_remainder(shares, total):
    """Integer counts summing to ``total`` proportional to ``shares``.

    Leftover units go to the largest fractional parts; lower index first on ties.
    """
    shares = np.asarray(shares, dtype=float)
    quotas = shares / shares.sum() * total
    counts = np.floor(quotas).astype(np.int64)
    left = int(total - counts.sum())
    if left:
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:left]] += 1
    return counts


def adasyn_allocation(d, k, total):
    """Majority fraction among each minority row's ``k`` nearest rows and the
    resulting per-anchor generation counts."""
    minority = d.class_indices(1)
    ratios = np.mean(d.labels[knn_table(d, k, minority)] == 0, axis=1)
    if ratios.sum() == 0:
        warnings.warn(
            "no minority row has a majority neighbour; ADASYN falls back to a "
            "uniform allocation",
            RuntimeWarning,
            stacklevel=2,
        )
        return ratios, largest_remainder(np.ones(minority.size), total)
    return ratios, largest_remainder(ratios, total)


def adasyn(d, cfg, rng=None):
    n_new = _deficit(d, cfg.k_neighbors)
    rng = _rng(cfg, rng)
    minority, nbrs = _minority_neighbors(d, cfg.k_neighbors)
    ratios, counts = adasyn_allocation(d, cfg.k_neighbors, n_new)
    slots = np.repeat(np.arange(minority.size), counts)
    cols = rng.integers(cfg.k_neighbors, size=n_new)
    gaps = rng.random(n_new)
    info = {"allocation": counts.tolist()}
    return _interpolated(d, minority[slots], nbrs[slots, cols], gaps, cfg, info)


def enn_mask(d, k=3):
    """Keep-mask dropping rows whose ``k`` nearest neighbours out-vote their label.

    An exact vote tie keeps the row.
    """
    if d.n_samples < k + 1:
        raise InsufficientSamplesError(f"ENN with k={k} needs at least {k + 1} rows")
    votes = d.labels[knn_table(d, k)].sum(axis=1)
    predicted = (2 * votes > k).astype(d.labels.dtype)
    return (2 * votes == k) | (predicted == d.labels)


def enn_clean(d, k=3):
    return d.subset(np.flatnonzero(enn_mask(d, k)))


SAFE, DANGER, NOISE = "safe", "danger", "noise"


def borderline_categories(d, m):
    """Safe / danger / noise label of each minority row from the majority count
    among its ``m`` nearest rows (danger: at least half, but not all)."""
    minority = d.class_indices(1)
    n_maj = np.sum(d.labels[knn_table(d, m, minority)] == 0, axis=1)
    out = np.where(n_maj == m, NOISE, np.where(2 * n_maj >= m, DANGER, SAFE))
    return minority, out.astype("<U6")


def borderline_smote(d, cfg, rng=None):
    """Borderline-SMOTE anchored on danger rows.

    ``borderline1`` interpolates toward minority neighbours with gap U[0, 1].
    ``borderline2`` additionally picks, with probability 1/2, one of the
    anchor's ``k`` nearest majority rows with gap U[0, 0.5].
    """
    n_new = _deficit(d, cfg.k_neighbors)
    rng = _rng(cfg, rng)
    minority, categories = borderline_categories(d, cfg.m_neighbors)
    danger = np.flatnonzero(categories == DANGER)
    if danger.size == 0:
        raise DataError("no borderline (danger) minority rows; use plain SMOTE instead")
    _, nbrs = _minority_neighbors(d, cfg.k_neighbors)
    slots = danger[rng.integers(danger.size, size=n_new)]
    cols = rng.integers(cfg.k_neighbors, size=n_new)
    gaps = rng.random(n_new)
    partners = nbrs[slots, cols]
    if cfg.borderline_kind == "borderline2":
        toward_majority = rng.random(n_new) < 0.5
        maj_nbrs = {
            s: knn_other_class(d, 0, minority[s], cfg.k_neighbors).neighbor_indices
            for s in np.unique(slots[toward_majority])
        }
        for i in np.flatnonzero(toward_majority):
            partners[i] = maj_nbrs[slots[i]][cols[i]]
            gaps[i] *= 0.5
    info = {"n_danger": int(danger.size), "n_noise": int(np.sum(categories == NOISE))}
    return _interpolated(d, minority[slots], partners, gaps, cfg, info)


def smote_tomek(d, cfg, rng=None):
    r = smote(d, cfg, rng)
    return r.keep(tomek_mask(r.dataset))


def smote_enn(d, cfg, rng=None):
    r = smote(d, cfg, rng)
    return r.keep(enn_mask(r.dataset, cfg.enn_neighbors))


_FUNCTIONS = {
    "smote": smote,
    "smote_tomek": smote_tomek,
    "adasyn": adasyn,
    "smote_enn": smote_enn,
    "borderline_smote": borderline_smote,
}


class _Baseline(BaseResampler):
    def config(self):
        raise NotImplementedError

    def resample(self, d):
        cfg = self.config()
        return _FUNCTIONS[cfg.method](d, cfg)


class SMOTE(_Baseline):
    """SMOTE oversampler.

    Parameters
    ----------
    k_neighbors : int, default=5
    random_state : int or None, default=None
    """

    method = "smote"

    def __init__(self, k_neighbors=5, random_state=None):
        self.k_neighbors = k_neighbors
        self.random_state = random_state

    def config(self):
        return BaselineConfig(self.method, self.k_neighbors, seed=self.random_state)


class SMOTETomek(SMOTE):
    """SMOTE followed by removal of the majority side of Tomek links."""

    method = "smote_tomek"


class ADASYN(_Baseline):
    """ADASYN: per-anchor counts proportional to the majority share of its
    ``n_neighbors`` nearest rows."""

    method = "adasyn"

    def __init__(self, n_neighbors=5, random_state=None):
        self.n_neighbors = n_neighbors
        self.random_state = random_state

    def config(self):
        return BaselineConfig(self.method, self.n_neighbors, seed=self.random_state)


class SMOTEENN(_Baseline):
    """SMOTE followed by edited-nearest-neighbour cleaning of both classes."""

    method = "smote_enn"

    def __init__(self, k_neighbors=5, enn_neighbors=3, random_state=None):
        self.k_neighbors = k_neighbors
        self.enn_neighbors = enn_neighbors
        self.random_state = random_state

    def config(self):
        return BaselineConfig(self.method, self.k_neighbors,
                              enn_neighbors=self.enn_neighbors, seed=self.random_state)


class BorderlineSMOTE(_Baseline):
    """Borderline-SMOTE.

    Parameters
    ----------
    k_neighbors : int, default=5
        Neighbours used for interpolation.
    m_neighbors : int, default=10
        Neighbours used to tell safe, danger and noise rows apart.
    kind : {"borderline-1", "borderline-2"}, default="borderline-2"
    random_state : int or None, default=None
    """

    method = "borderline_smote"

    def __init__(self, k_neighbors=5, m_neighbors=10, kind="borderline-2", random_state=None):
        self.k_neighbors = k_neighbors
        self.m_neighbors = m_neighbors
        self.kind = kind
        self.random_state = random_state

    def config(self):
        return BaselineConfig(self.method, self.k_neighbors, self.kind,
                              self.m_neighbors, seed=self.random_state)
