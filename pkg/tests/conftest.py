from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from poqg.data import Dataset, load_keel, make_case_study

KEEL_DIR = Path(__file__).parent / "fixtures" / "keel"

# file stem -> (nominal handling, imbalance ratio as published for the file)
KEEL_FIXTURES = {
    "ecoli-0_vs_1": 1.86,
    "ecoli4": 15.8,
    "glass-0-1-6_vs_5": 19.44,
    "yeast-1-2-8-9_vs_7": 30.57,
    "winequality-red-4": 29.17,
    "yeast6": 41.4,
    "abalone19": 129.44,
}


def load_fixture(stem):
    d = load_keel(KEEL_DIR / f"{stem}.dat", nominal="drop")
    return d.subset(np.arange(d.n_samples), name=stem)


@pytest.fixture(scope="session")
def keel_datasets():
    return {stem: load_fixture(stem) for stem in KEEL_FIXTURES}


@pytest.fixture(scope="session")
def case_study():
    return make_case_study(0)


def random_dataset(rng, n_majority=40, n_minority=12, n_features=2, spread=1.0, name="random"):
    X = np.vstack([
        rng.normal(0.0, spread, size=(n_majority, n_features)),
        rng.normal(1.5, spread, size=(n_minority, n_features)),
    ])
    y = np.r_[np.zeros(n_majority, dtype=int), np.ones(n_minority, dtype=int)]
    return Dataset(X, y, name=name)


def line_dataset(majority, minority):
    """1-D dataset from two coordinate lists (majority rows first)."""
    X = np.array(list(majority) + list(minority), dtype=float).reshape(-1, 1)
    y = np.r_[np.zeros(len(majority), dtype=int), np.ones(len(minority), dtype=int)]
    return Dataset(X, y)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
