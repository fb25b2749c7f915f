"""Metrics, desk-scale classifiers and cross-validated evaluation."""

from __future__ import annotations

import json
import math
import time
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .base import NoResampling
from .data import DataError, InsufficientSamplesError, minmax_bounds, minmax_scale
from .neighbors import query_knn

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "FoldResult",
    "EvalReport",
    "LeakageError",
    "ConvergenceError",
    "confusion",
    "roc_auc_rank",
    "metrics",
    "KNNClassifier",
    "LogisticClassifier",
    "logistic_loss_and_grad",
    "train_knn_classifier",
    "train_logistic",
    "substream_seed",
    "check_no_leakage",
    "cross_validate",
]

NA = float("nan")


class LeakageError(AssertionError):
    """Synthetic provenance reaches outside the training fold."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Rates for class 1 as positive.  Undefined values are NaN.

    ``g_mean`` is ``sqrt(tpr * tnr)`` and ``roc_auc`` the rank statistic.
    The ``paper_literal_*`` fields are ``sqrt(tpr * fpr)`` and
    ``(tpr + fpr) / 2``, kept as labelled diagnostics only.
    """

    tpr: float
    fpr: float
    tnr: float
    g_mean: float
    roc_auc: float
    balanced_accuracy: float
    paper_literal_gmean: float
    paper_literal_auc: float

    def as_dict(self, paper_literal=False):
        out = {
            "tpr": self.tpr, "fpr": self.fpr, "tnr": self.tnr, "g_mean": self.g_mean,
            "roc_auc": self.roc_auc, "balanced_accuracy": self.balanced_accuracy,
        }
        if paper_literal:
            out["paper_literal_gmean"] = self.paper_literal_gmean
            out["paper_literal_auc"] = self.paper_literal_auc
        return out


def confusion(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {actual.shape}")
    for name, v in (("predicted", predicted), ("actual", actual)):
        if not np.isin(v, (0, 1)).all():
            raise ValueError(f"{name} labels must be 0 or 1")
    p, a = predicted == 1, actual == 1
    return ConfusionMatrix(int(np.sum(p & a)), int(np.sum(p & ~a)),
                           int(np.sum(~p & ~a)), int(np.sum(~p & a)))


def roc_auc_rank(scores, actual):
    """P(score of a random positive > score of a random negative), ties count 1/2."""
    scores = np.asarray(scores, dtype=float)
    actual = np.asarray(actual)
    n_pos = int(np.sum(actual == 1))
    n_neg = actual.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return NA
    ranks = rankdata(scores)
    u = ranks[actual == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _ratio(num, den):
    return num / den if den else NA


def metrics(m, scores=None, actual=None):
    tpr = _ratio(m.tp, m.tp + m.fn)
    fpr = _ratio(m.fp, m.fp + m.tn)
    tnr = 1.0 - fpr
    auc = NA if scores is None else roc_auc_rank(scores, actual)
    return MetricsReport(
        tpr=tpr,
        fpr=fpr,
        tnr=tnr,
        g_mean=math.sqrt(tpr * tnr),
        roc_auc=auc,
        balanced_accuracy=(tpr + tnr) / 2.0,
        paper_literal_gmean=math.sqrt(tpr * fpr),
        paper_literal_auc=(tpr + fpr) / 2.0,
    )


def _check_binary(y):
    if not np.isin(y, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    return y.astype(np.int64)


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """k-nearest-neighbour vote; the score is the minority share of the
    ``n_neighbors`` closest training rows.  A score of exactly 0.5 predicts
    the majority class."""

    def __init__(self, n_neighbors=5, random_state=None):
        self.n_neighbors = n_neighbors
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if self.n_neighbors > X.shape[0]:
            raise InsufficientSamplesError(
                f"n_neighbors={self.n_neighbors} exceeds {X.shape[0]} training rows"
            )
        self.X_ = X
        self.y_ = _check_binary(y)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        nn = query_knn(self.X_, X, self.n_neighbors)
        return self.y_[nn].mean(axis=1)

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1.0 - s, s])

    def predict(self, X):
        return (self.decision_function(X) > 0.5).astype(np.int64)


def logistic_loss_and_grad(params, X, y, l2=0.0):
    """Mean log loss of ``sigmoid(X @ w + b)`` and its gradient.

    ``params`` is ``[w..., b]``.
    """
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + exp(z)) - y z, evaluated stably
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    r = (p - y) / y.size
    grad = np.r_[X.T @ r + l2 * w, r.sum()]
    return float(loss), grad


class LogisticClassifier(ClassifierMixin, BaseEstimator):
    """Logistic regression fit by full-batch gradient descent on standardised
    features (train statistics only)."""

    def __init__(self, epochs=500, learning_rate=0.5, l2=0.0, random_state=None):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = _check_binary(y)
        if np.unique(y).size < 2:
            raise DataError("logistic regression needs both classes in the training data")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        Xs = (X - self.mean_) / self.scale_
        rng = np.random.default_rng(self.random_state)
        params = rng.normal(0.0, 0.01, X.shape[1] + 1)
        loss = NA
        for _ in range(self.epochs):
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grad = logistic_loss_and_grad(params, Xs, y, self.l2)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise ConvergenceError(
                    f"gradient descent diverged (loss={loss}); try a smaller learning_rate"
                )
            with np.errstate(over="ignore"):
                params = params - self.learning_rate * grad
        self.coef_ = params[:-1]
        self.intercept_ = params[-1]
        self.loss_ = loss
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        z = ((X - self.mean_) / self.scale_) @ self.coef_ + self.intercept_
        return 0.5 * (1.0 + np.tanh(0.5 * z))

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1.0 - s, s])

    def predict(self, X):
        return (self.decision_function(X) > 0.5).astype(np.int64)


def train_knn_classifier(train, k=5):
    """Scoring function of a k-NN vote fitted on ``train``."""
    return KNNClassifier(k).fit(train.features, train.labels).decision_function


def train_logistic(train, epochs=500, learning_rate=0.5, seed=0):
    return LogisticClassifier(epochs, learning_rate, random_state=seed).fit(
        train.features, train.labels
    ).decision_function


def substream_seed(seed, *keys):
    """Independent 32-bit seed for ``(seed, *keys)``; strings hash with CRC-32."""
    key = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in keys)
    return int(np.random.SeedSequence(int(seed), spawn_key=key).generate_state(1)[0])


def check_no_leakage(result, train_idx, test_idx, train_features=None, atol=1e-9):
    """Verify every synthetic row is built from training rows only.

    Provenance ids (local to the training subset) must be in range and map
    to rows outside ``test_idx``.  With ``train_features`` the stored points
    must also be reproduced from those rows.
    """
    batch = result.batch
    if len(batch) == 0:
        return
    n_train = len(train_idx)
    ids = batch.referenced_ids()
    if ids.min() < 0 or ids.max() >= n_train:
        raise LeakageError("synthetic provenance references rows outside the training fold")
    if np.intersect1d(np.asarray(train_idx)[ids], test_idx).size:
        raise LeakageError("synthetic provenance references test-fold rows")
    if train_features is None:
        return
    X = np.asarray(train_features)
    rebuilt = batch.q1[:, None] * X[batch.proxima_ids] + batch.q2[:, None] * X[batch.orion_ids]
    if np.any(np.abs(rebuilt - batch.points) > atol * (1.0 + np.abs(batch.points))):
        raise LeakageError("synthetic rows do not match their training-fold provenance")


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    n_synthetic: int
    confusion: ConfusionMatrix
    metrics: MetricsReport
    defined: bool
    wall_time: float = 0.0


@dataclass
class EvalReport:
    dataset: str
    method: str
    classifier: str
    folds: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def _values(self, name):
        return np.array([getattr(f.metrics, name) for f in self.folds if f.defined])

    def mean(self, name):
        v = self._values(name)
        return float(v.mean()) if v.size else NA

    def std(self, name):
        v = self._values(name)
        return float(v.std(ddof=0)) if v.size else NA

    @property
    def n_undefined(self):
        return sum(not f.defined for f in self.folds)

    def rows(self, paper_literal=False):
        out = []
        for f in self.folds:
            row = {
                "dataset": self.dataset, "method": self.method,
                "classifier": self.classifier, "fold": f.fold, "defined": int(f.defined),
                "n_train": f.n_train, "n_test": f.n_test, "n_synthetic": f.n_synthetic,
                "tp": f.confusion.tp, "fp": f.confusion.fp,
                "tn": f.confusion.tn, "fn": f.confusion.fn,
            }
            row.update(f.metrics.as_dict(paper_literal))
            out.append(row)
        return out

    def summary(self, paper_literal=False):
        names = ["g_mean", "roc_auc", "balanced_accuracy"]
        if paper_literal:
            names += ["paper_literal_gmean", "paper_literal_auc"]
        out = {
            "dataset": self.dataset, "method": self.method, "classifier": self.classifier,
            "n_folds": len(self.folds), "n_undefined_folds": self.n_undefined,
        }
        for name in names:
            out[f"mean_{name}"] = self.mean(name)
            out[f"std_{name}"] = self.std(name)
        return out

    def to_json(self, paper_literal=False):
        payload = {
            "summary": self.summary(paper_literal),
            "config": self.config,
            "folds": self.rows(paper_literal),
        }
        return json.dumps(_jsonable(payload), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _with_seed(estimator, seed):
    est = clone(estimator)
    if "random_state" in est.get_params():
        est.set_params(random_state=seed)
    return est


def cross_validate(d, resampler, classifier, folds, seed=0, scale=False, method=None,
                   classifier_name=None):
    """Resample each training fold, fit ``classifier`` and score the untouched
    test fold.

    ``resampler`` is any :class:`~poqg.base.BaseResampler` (``None`` means no
    resampling); ``classifier`` any estimator with ``decision_function``.
    Random states are replaced by substreams keyed on
    ``(seed, dataset, method, fold)``.  Folds whose test split lacks a class
    are kept but marked undefined and left out of the aggregates.
    """
    resampler = NoResampling() if resampler is None else resampler
    method = method or resampler.method
    classifier_name = classifier_name or type(classifier).__name__
    report = EvalReport(
        d.name, method, classifier_name,
        config={"resampler": _jsonable(resampler.get_params()),
                "classifier": _jsonable(classifier.get_params()),
                "seed": seed, "n_folds": folds.n_folds, "fold_seed": folds.seed,
                "scale": bool(scale)},
    )
    for fold, train_idx, test_idx in folds:
        start = time.perf_counter()
        train, test = d.subset(train_idx), d.subset(test_idx)
        if scale:
            bounds = minmax_bounds(train)
            train, test = minmax_scale(train, bounds), minmax_scale(test, bounds)
        fold_seed = substream_seed(seed, d.name, method, fold)
        result = _with_seed(resampler, fold_seed).resample(train)
        check_no_leakage(result, train_idx, test_idx, train.features)
        clf = _with_seed(classifier, fold_seed).fit(
            result.dataset.features, result.dataset.labels
        )
        scores = clf.decision_function(test.features)
        predicted = (scores > 0.5).astype(np.int64)
        cm = confusion(predicted, test.labels)
        defined = 0 < int(test.labels.sum()) < test.n_samples
        if not defined:
            warnings.warn(
                f"{d.name}: test fold {fold} holds a single class; its metrics are "
                "undefined and left out of the aggregates",
                RuntimeWarning,
                stacklevel=2,
            )
        report.folds.append(FoldResult(
            fold, train.n_samples, test.n_samples, int(result.synthetic.sum()), cm,
            metrics(cm, scores, test.labels), defined, time.perf_counter() - start,
        ))
    return report
