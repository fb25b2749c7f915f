"""Datasets: representation, KEEL/CSV ingestion, imbalance statistics and folds.

Labels are always binary with ``1`` marking the minority class and ``0`` the
majority class.  Loaders map the rarer class of a file to ``1``.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "KeelParseError",
    "InsufficientSamplesError",
    "Dataset",
    "DatasetStats",
    "FoldPlan",
    "load_keel",
    "load_csv",
    "save_csv",
    "stats",
    "stratified_folds",
    "make_case_study",
    "minmax_bounds",
    "minmax_scale",
]


class DataError(ValueError):
    """Input data cannot be used as requested."""


class KeelParseError(DataError):
    """Malformed KEEL file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientSamplesError(DataError):
    """A class is too small for the requested neighbourhood or fold count."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with binary labels (1 = minority).

    Parameters
    ----------
    features : array-like of shape (n_samples, n_features)
        Finite real values.
    labels : array-like of shape (n_samples,)
        Values in {0, 1}.
    feature_names : sequence of str, optional
        Defaults to ``x0, x1, ...``.
    name : str
        Identifier used in reports.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = ()
    name: str = "dataset"

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(
                f"labels shape {y.shape} does not match {X.shape[0]} feature rows"
            )
        if y.size and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 (majority) or 1 (minority)")
        y = y.astype(np.int64)
        if not np.isfinite(X).all():
            row, col = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite feature value at row {row}, column {col}")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError(
                f"{len(names)} feature names given for {X.shape[1]} columns"
            )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(str(n) for n in names))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def class_indices(self, cls):
        """Row ids of class ``cls`` in ascending order."""
        return np.flatnonzero(self.labels == cls)

    def subset(self, indices, name=None):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.feature_names,
            self.name if name is None else name,
        )

    def with_rows(self, features, labels):
        """Copy of this dataset with extra rows appended at the end."""
        return Dataset(
            np.vstack([self.features, np.asarray(features, dtype=float).reshape(-1, self.n_features)]),
            np.concatenate([self.labels, np.asarray(labels, dtype=np.int64)]),
            self.feature_names,
            self.name,
        )


@dataclass(frozen=True)
class DatasetStats:
    n_majority: int
    n_minority: int
    imbalance_ratio: float
    n_features: int


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Assignment of each row to one of ``n_folds`` test folds."""

    n_folds: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def __iter__(self):
        for fold in range(self.n_folds):
            yield fold, self.train_indices(fold), self.test_indices(fold)


def stats(d):
    """Class counts and imbalance ratio ``n_majority / n_minority``."""
    n_min = int(np.count_nonzero(d.labels == 1))
    n_maj = int(d.n_samples - n_min)
    if n_min == 0 or n_maj == 0:
        raise DataError(
            f"both classes must be nonempty (majority={n_maj}, minority={n_min})"
        )
    return DatasetStats(n_maj, n_min, n_maj / n_min, d.n_features)


def _binarize(raw_labels, minority_label=None, where="labels"):
    counts = Counter(raw_labels)
    if len(counts) > 2:
        extra = sorted(counts)[2:]
        raise DataError(
            f"{where}: expected a binary class, found {len(counts)} values "
            f"(e.g. {extra[0]!r} outside {sorted(counts)[:2]})"
        )
    if len(counts) < 2:
        raise DataError(f"{where}: single-class data ({sorted(counts)})")
    if minority_label is None:
        # rarer class is the minority; equal counts -> smaller label string
        minority_label = min(counts, key=lambda c: (counts[c], c))
    elif minority_label not in counts:
        raise DataError(
            f"{where}: minority label {minority_label!r} not among {sorted(counts)}"
        )
    return np.array([1 if c == minority_label else 0 for c in raw_labels], dtype=np.int64)


_ATTRIBUTE = re.compile(r"^@attribute\s+(?P<name>'[^']*'|\"[^\"]*\"|[^\s{]+)\s*(?P<type>.*)$", re.I)
_NUMERIC_TYPES = ("real", "integer", "numeric")


def load_keel(path, nominal="reject"):
    """Read a KEEL ``.dat`` file.

    Numeric attributes become features; the class is the ``@outputs``
    attribute when declared and the last attribute otherwise.  Nominal input
    attributes raise :class:`KeelParseError` unless ``nominal="drop"``.
    """
    if nominal not in ("reject", "drop"):
        raise ValueError(f"nominal must be 'reject' or 'drop', got {nominal!r}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    relation = None
    attributes = []  # (name, is_numeric, decl_line)
    outputs = None
    data_line = None
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not line.startswith("@"):
            raise KeelParseError(f"unexpected content before @data: {line[:40]!r}", lineno)
        keyword = line.split(None, 1)[0].lower()
        if keyword == "@relation":
            parts = line.split(None, 1)
            if len(parts) < 2:
                raise KeelParseError("@relation without a name", lineno)
            relation = parts[1].strip().strip("'\"")
        elif keyword == "@attribute":
            m = _ATTRIBUTE.match(line)
            if m is None or not m.group("type").strip():
                raise KeelParseError(f"malformed attribute declaration {line!r}", lineno)
            name = m.group("name").strip("'\"")
            kind = m.group("type").strip()
            if kind.startswith("{"):
                if not kind.endswith("}"):
                    raise KeelParseError(f"unterminated value set for {name!r}", lineno)
                attributes.append((name, False, lineno))
            elif kind.split()[0].split("[")[0].lower() in _NUMERIC_TYPES:
                attributes.append((name, True, lineno))
            else:
                raise KeelParseError(f"unknown type {kind!r} for attribute {name!r}", lineno)
        elif keyword in ("@inputs", "@input"):
            pass
        elif keyword in ("@outputs", "@output"):
            outputs = [s.strip() for s in line.split(None, 1)[1].split(",")] if " " in line else []
        elif keyword == "@data":
            data_line = lineno
            break
        else:
            raise KeelParseError(f"unknown directive {keyword!r}", lineno)

    if data_line is None:
        raise KeelParseError("missing @data section")
    if len(attributes) < 2:
        raise KeelParseError("need at least one input attribute and a class attribute")

    names = [a[0] for a in attributes]
    class_pos = len(attributes) - 1
    if outputs:
        if len(outputs) != 1 or outputs[0] not in names:
            raise KeelParseError(f"@outputs must name one declared attribute, got {outputs}")
        class_pos = names.index(outputs[0])

    keep = []
    for pos, (name, numeric, decl) in enumerate(attributes):
        if pos == class_pos:
            continue
        if not numeric:
            if nominal == "reject":
                raise KeelParseError(
                    f"nominal input attribute {name!r} is not supported "
                    "(pass nominal='drop' to discard it)",
                    decl,
                )
            continue
        keep.append(pos)

    rows = []
    raw_labels = []
    for lineno in range(data_line + 1, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line or line.startswith("%"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(attributes):
            raise KeelParseError(
                f"expected {len(attributes)} fields, found {len(fields)}", lineno
            )
        values = []
        for pos in keep:
            try:
                values.append(float(fields[pos]))
            except ValueError:
                raise KeelParseError(
                    f"non-numeric value {fields[pos]!r} for attribute {names[pos]!r}", lineno
                ) from None
            if not np.isfinite(values[-1]):
                raise KeelParseError(
                    f"non-finite value {fields[pos]!r} for attribute {names[pos]!r}", lineno
                )
        rows.append(values)
        raw_labels.append(fields[class_pos])

    if not rows:
        raise KeelParseError("empty data section", data_line)
    labels = _binarize(raw_labels, where=str(path))
    X = np.array(rows, dtype=float).reshape(len(rows), len(keep))
    return Dataset(X, labels, tuple(names[p] for p in keep), relation or path.stem)


def load_csv(path, label_column=-1, minority_label=None, header=True,
             exclude_columns=(), name=None):
    """Read a comma-separated file with one label column.

    ``label_column`` is a header name or a (possibly negative) position.
    ``minority_label`` is compared as a string; when omitted the rarer label is
    the minority.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            records = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    records = [r for r in records if r]
    if header:
        if not records:
            raise DataError(f"{path}: empty file")
        columns, body = [c.strip() for c in records[0]], records[1:]
    else:
        if isinstance(label_column, str):
            raise DataError("label_column by name requires a header row")
        body = records
        columns = [f"x{j}" for j in range(len(records[0]))] if records else []
    if not body:
        raise DataError(f"{path}: no data rows")

    if isinstance(label_column, str):
        if label_column not in columns:
            raise DataError(f"{path}: missing label column {label_column!r}")
        label_pos = columns.index(label_column)
    else:
        label_pos = int(label_column)
        if not -len(columns) <= label_pos < len(columns):
            raise DataError(f"{path}: label column {label_column} out of range")
        label_pos %= len(columns)
    for col in exclude_columns:
        if col not in columns:
            raise DataError(f"{path}: missing column {col!r}")
    skip = {label_pos} | {columns.index(c) for c in exclude_columns}
    feature_pos = [j for j in range(len(columns)) if j not in skip]

    X = np.empty((len(body), len(feature_pos)))
    raw_labels = []
    first_row = 2 if header else 1
    for i, rec in enumerate(body):
        if len(rec) != len(columns):
            raise DataError(
                f"{path}: row {i + first_row} has {len(rec)} fields, expected {len(columns)}"
            )
        for j, pos in enumerate(feature_pos):
            try:
                value = float(rec[pos])
            except ValueError:
                value = float("nan")
            if not np.isfinite(value):
                raise DataError(
                    f"{path}: invalid value {rec[pos]!r} at row {i + first_row}, "
                    f"column {columns[pos]!r}"
                )
            X[i, j] = value
        raw_labels.append(rec[label_pos].strip())
    minority = None if minority_label is None else str(minority_label)
    y = _binarize(raw_labels, minority, where=str(path))
    return Dataset(X, y, tuple(columns[p] for p in feature_pos), name or path.stem)


def save_csv(d, path, synthetic=None, label_name="label"):
    """Write features and 0/1 labels; optionally a ``synthetic`` 0/1 column."""
    header = list(d.feature_names) + [label_name]
    if synthetic is not None:
        synthetic = np.asarray(synthetic, dtype=bool)
        if synthetic.shape != (d.n_samples,):
            raise DataError("synthetic mask must have one entry per row")
        header.append("synthetic")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(d.n_samples):
            row = [repr(float(v)) for v in d.features[i]] + [int(d.labels[i])]
            if synthetic is not None:
                row.append(int(synthetic[i]))
            writer.writerow(row)


def stratified_folds(d, n_folds=5, seed=0):
    """Deterministic stratified assignment of rows to ``n_folds`` folds.

    Each class is shuffled and dealt round-robin; the majority deal starts
    where the minority deal stopped so fold sizes differ by at most one.
    """
    if n_folds < 2:
        raise DataError(f"n_folds must be >= 2, got {n_folds}")
    minority = d.class_indices(1)
    majority = d.class_indices(0)
    if minority.size < n_folds:
        raise InsufficientSamplesError(
            f"{minority.size} minority rows cannot fill {n_folds} folds"
        )
    rng = np.random.default_rng(seed)
    assignments = np.empty(d.n_samples, dtype=np.int64)
    offset = 0
    for members in (minority, majority):
        order = rng.permutation(members)
        assignments[order] = (np.arange(order.size) + offset) % n_folds
        offset = (offset + order.size) % n_folds
    assignments.setflags(write=False)
    return FoldPlan(n_folds, assignments, seed)


def make_case_study(seed=0, n_majority=202, n_minority=23):
    """Two overlapping 2-D Gaussian clusters (202 majority, 23 minority rows)."""
    rng = np.random.default_rng(seed)
    majority = rng.normal(loc=(0.0, 0.0), scale=(1.0, 1.0), size=(n_majority, 2))
    minority = rng.normal(loc=(1.6, 1.6), scale=(0.55, 0.55), size=(n_minority, 2))
    X = np.vstack([majority, minority])
    y = np.r_[np.zeros(n_majority, dtype=np.int64), np.ones(n_minority, dtype=np.int64)]
    return Dataset(X, y, ("x0", "x1"), "case_study")


def minmax_bounds(d):
    return d.features.min(axis=0), d.features.max(axis=0)


def minmax_scale(d, bounds=None):
    """Scale each feature to [0, 1] using ``bounds`` (default: ``d``'s own range).

    Constant features map to 0.  Rows outside ``bounds`` fall outside [0, 1].
    """
    lo, hi = minmax_bounds(d) if bounds is None else bounds
    span = np.where(hi > lo, hi - lo, 1.0)
    return Dataset((d.features - lo) / span, d.labels, d.feature_names, d.name)
