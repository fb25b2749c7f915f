"""Shared resampler plumbing: synthetic batches, results and the estimator base."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_X_y

from .data import Dataset

__all__ = [
    "ConfigError",
    "SyntheticBatch",
    "Resampled",
    "BaseResampler",
    "NoResampling",
    "as_dataset",
]


class ConfigError(ValueError):
    """Invalid hyperparameters or run configuration."""


@dataclass(frozen=True, eq=False)
class SyntheticBatch:
    """Generated minority rows with provenance.

    Row ``i`` equals ``q1[i] * X[proxima_ids[i]] + q2[i] * X[orion_ids[i]]`` up
    to rounding, where ids refer to rows of the dataset that was resampled.
    SMOTE-style methods store ``proxima = anchor``, ``q1 = 1 - gap``.
    """

    points: np.ndarray
    anchor_ids: np.ndarray
    proxima_ids: np.ndarray
    orion_ids: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    method: str = ""
    config: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n_features, method="", config=None):
        ids = np.empty(0, dtype=np.int64)
        w = np.empty(0)
        return cls(np.empty((0, n_features)), ids, ids, ids, w, w, method, config or {})

    @classmethod
    def from_records(cls, points, anchors, proximas, orions, q1, q2, n_features,
                     method="", config=None, info=None):
        if not len(points):
            batch = cls.empty(n_features, method, config)
            if info:
                batch.info.update(info)
            return batch
        return cls(
            np.asarray(points, dtype=float).reshape(len(points), n_features),
            np.asarray(anchors, dtype=np.int64),
            np.asarray(proximas, dtype=np.int64),
            np.asarray(orions, dtype=np.int64),
            np.asarray(q1, dtype=float),
            np.asarray(q2, dtype=float),
            method,
            dict(config or {}),
            dict(info or {}),
        )

    def __len__(self):
        return self.points.shape[0]

    def referenced_ids(self):
        """Every source row id named by the provenance."""
        return np.unique(np.concatenate([self.anchor_ids, self.proxima_ids, self.orion_ids]))

    def remap(self, index_map):
        """Translate provenance ids through ``index_map`` (e.g. fold-local to global)."""
        index_map = np.asarray(index_map, dtype=np.int64)
        return SyntheticBatch(
            self.points, index_map[self.anchor_ids], index_map[self.proxima_ids],
            index_map[self.orion_ids], self.q1, self.q2, self.method, self.config,
            self.info,
        )

    def to_csv(self, path, feature_names=None, kept=None):
        names = list(feature_names or (f"x{j}" for j in range(self.points.shape[1])))
        header = names + ["anchor_id", "proxima_id", "orion_id", "q1", "q2"]
        if kept is not None:
            header.append("kept")
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i in range(len(self)):
                row = [repr(float(v)) for v in self.points[i]]
                row += [int(self.anchor_ids[i]), int(self.proxima_ids[i]),
                        int(self.orion_ids[i]), repr(float(self.q1[i])),
                        repr(float(self.q2[i]))]
                if kept is not None:
                    row.append(int(kept[i]))
                writer.writerow(row)


@dataclass(frozen=True, eq=False)
class Resampled:
    """Output of a resampler.

    ``origin[r]`` is the input row copied to output row ``r`` or -1 for a
    synthetic row.  ``batch`` keeps every generated row, including those a
    cleaning step removed; ``batch_rows[i]`` is the output row of batch entry
    ``i`` or -1 when it was removed.
    """

    dataset: Dataset
    origin: np.ndarray
    batch: SyntheticBatch
    batch_rows: np.ndarray

    @classmethod
    def from_generation(cls, d, batch):
        out = d.with_rows(batch.points, np.ones(len(batch), dtype=np.int64))
        origin = np.r_[np.arange(d.n_samples), np.full(len(batch), -1)].astype(np.int64)
        rows = np.arange(d.n_samples, d.n_samples + len(batch), dtype=np.int64)
        return cls(out, origin, batch, rows)

    @property
    def synthetic(self):
        return self.origin < 0

    @property
    def kept(self):
        return self.batch_rows >= 0

    def keep(self, mask):
        """Restrict to output rows where ``mask`` is true (cleaning)."""
        mask = np.asarray(mask, dtype=bool)
        new_pos = np.full(mask.size, -1, dtype=np.int64)
        new_pos[mask] = np.arange(int(mask.sum()))
        rows = np.where(self.batch_rows >= 0, new_pos[np.maximum(self.batch_rows, 0)], -1)
        return Resampled(
            self.dataset.subset(np.flatnonzero(mask)), self.origin[mask], self.batch, rows
        )


def as_dataset(X, y, name="dataset"):
    X, y = check_X_y(X, y, dtype=float, ensure_min_samples=2)
    return Dataset(X, y, name=name)


def resolve_rng(seed):
    return np.random.default_rng(seed)


class BaseResampler(BaseEstimator):
    """Estimator interface shared by every resampler.

    Subclasses implement ``resample(dataset) -> Resampled``.  ``fit_resample``
    accepts arrays with labels in {0, 1} (1 = minority) and exposes the
    provenance of the last call as ``batch_`` and ``origin_``.
    """

    method = ""

    def resample(self, d):
        raise NotImplementedError

    def fit_resample(self, X, y):
        result = self.resample(as_dataset(X, y))
        self.resampled_ = result
        self.batch_ = result.batch
        self.origin_ = result.origin
        return np.array(result.dataset.features), np.array(result.dataset.labels)


class NoResampling(BaseResampler):
    """Identity resampler (the no-resampling baseline)."""

    method = "none"

    def __init__(self, random_state=None):
        self.random_state = random_state

    def resample(self, d):
        return Resampled.from_generation(d, SyntheticBatch.empty(d.n_features, self.method))
