"""Name-based construction of resamplers and classifiers."""

from __future__ import annotations

from .base import ConfigError, NoResampling
from .baselines import ADASYN, SMOTE, SMOTEENN, BorderlineSMOTE, SMOTETomek
from .core import POQG
from .evaluation import KNNClassifier, LogisticClassifier

__all__ = ["RESAMPLERS", "CLASSIFIERS", "DISPLAY_NAMES", "TABLE_ORDER",
           "make_resampler", "make_classifier", "display_name"]

RESAMPLERS = {
    "none": NoResampling,
    "poqg": POQG,
    "smote": SMOTE,
    "smote_tomek": SMOTETomek,
    "adasyn": ADASYN,
    "smote_enn": SMOTEENN,
    "borderline_smote": BorderlineSMOTE,
}

CLASSIFIERS = {"knn": KNNClassifier, "logistic": LogisticClassifier}

DISPLAY_NAMES = {
    "none": "None",
    "adasyn": "ADASYN",
    "borderline_smote": "Boundary_SMOTE",
    "smote": "SMOTE",
    "smote_enn": "SMOTE-ENN",
    "smote_tomek": "SMOTE-TL",
    "poqg": "PO-QG",
}

# column order of the results tables; PO-QG comes last
TABLE_ORDER = ("none", "adasyn", "borderline_smote", "smote", "smote_enn", "smote_tomek", "poqg")


def display_name(method):
    return DISPLAY_NAMES.get(method, method)


def _build(kind, table, name, params):
    if name not in table:
        raise ConfigError(f"unknown {kind} {name!r}; choose from {sorted(table)}")
    cls = table[name]
    params = dict(params or {})
    allowed = set(cls().get_params())
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ConfigError(f"unknown {kind} parameter(s) for {name}: {unknown}")
    est = cls(**params)
    if hasattr(est, "config"):
        try:
            est.config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    return est


def make_resampler(name, params=None):
    return _build("method", RESAMPLERS, name, params)


def make_classifier(name, params=None):
    return _build("classifier", CLASSIFIERS, name, params)
