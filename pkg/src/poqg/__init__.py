"""Proxima-Orion q-Gaussian oversampling for imbalanced binary data."""

from __future__ import annotations

__version__ = "0.1.0"

from .base import ConfigError, NoResampling, Resampled, SyntheticBatch
from .baselines import ADASYN, SMOTE, SMOTEENN, BorderlineSMOTE, SMOTETomek
from .core import POQG, PoqgConfig, oversample
from .data import (
    DataError, Dataset, InsufficientSamplesError, KeelParseError, load_csv, load_keel,
    make_case_study, stratified_folds,
)
from .evaluation import KNNClassifier, LogisticClassifier, cross_validate, metrics
from .stats import compare_methods, wilcoxon_signed_rank

__all__ = [
    "ADASYN", "BorderlineSMOTE", "ConfigError", "DataError", "Dataset",
    "InsufficientSamplesError", "KNNClassifier", "KeelParseError", "LogisticClassifier",
    "NoResampling", "POQG", "PoqgConfig", "Resampled", "SMOTE", "SMOTEENN", "SMOTETomek",
    "SyntheticBatch", "compare_methods", "cross_validate", "load_csv", "load_keel",
    "make_case_study", "metrics", "oversample", "stratified_folds", "wilcoxon_signed_rank",
]
