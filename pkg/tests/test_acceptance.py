"""Acceptance suite: one test per criterion, each printing a pass/fail line."""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chisquare

import poqg.evaluation as evaluation
from conftest import KEEL_DIR, KEEL_FIXTURES, load_fixture, random_dataset, record_criterion
from poqg import cli
from poqg.base import BaseResampler, Resampled, SyntheticBatch
from poqg.core import (
    PoqgConfig, generate_synthetic, normalize_q_weights, oversample, q_gaussian_weight,
    select_proxima_orion, weight_table,
)
from poqg.data import make_case_study, save_csv, stats, stratified_folds
from poqg.evaluation import KNNClassifier, LeakageError, cross_validate, roc_auc_rank
from poqg.neighbors import knn_any, knn_within
from poqg.registry import make_resampler
from poqg.stats import wilcoxon_signed_rank
from test_evaluation import trapezoid_auc
from test_neighbors import grid_dataset, oracle_knn
from test_stats import brute_force_p

pytestmark = pytest.mark.acceptance

RESAMPLER_NAMES = ("poqg", "smote", "smote_tomek", "adasyn", "smote_enn", "borderline_smote")

# (k, alpha, beta, q) per fixture; k limited by the minority rows in a training fold
TREND_CONFIGS = {
    "case_study": (5, 0.5, 0.1, 1.5),
    "ecoli4": (5, 0.3, 0.2, 1.3),
    "glass-0-1-6_vs_5": (5, 0.7, 0.2, 1.3),
    "yeast-1-2-8-9_vs_7": (5, 0.3, 0.05, 1.7),
    "winequality-red-4": (10, 0.3, 0.1, 1.5),
    "yeast6": (7, 0.7, 0.1, 1.7),
    "abalone19": (5, 0.5, 0.1, 1.7),
}


def all_fixtures():
    data = {"case_study": make_case_study(0)}
    data.update((stem, load_fixture(stem)) for stem in KEEL_FIXTURES)
    return data


def test_criterion_1_balance():
    data = all_fixtures()
    ratios = [stats(d).imbalance_ratio for d in data.values()]
    failures = []
    start = time.perf_counter()
    for name, d in data.items():
        for method in RESAMPLER_NAMES:
            r = make_resampler(method, {"random_state": 0}).resample(d)
            # rows before cleaning: every original plus every generated row
            n_min = stats(d).n_minority + len(r.batch)
            if n_min != stats(d).n_majority:
                failures.append(f"{name}/{method}: {n_min} vs {stats(d).n_majority}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10.0 and len(data) >= 6
    ok &= min(ratios) <= 1.9 and max(ratios) >= 129
    detail = (f"{len(data)} fixtures (IR {min(ratios):.2f}-{max(ratios):.2f}) x "
              f"{len(RESAMPLER_NAMES)} resamplers, {len(failures)} unbalanced, {elapsed:.2f}s")
    assert record_criterion(1, "balance", ok, detail), failures


def test_criterion_2_geometry():
    rng = np.random.default_rng(2)
    worst_segment = worst_forms = 0.0
    outside = total = 0
    while total < 10_000:
        d = random_dataset(rng, int(rng.integers(30, 80)), int(rng.integers(12, 30)),
                           n_features=int(rng.integers(2, 6)))
        cfg = PoqgConfig(k=int(rng.choice([5, 7, 10])), alpha=float(rng.uniform(0, 1)),
                         beta=float(rng.choice([0.05, 0.1, 0.2, 1.0])),
                         q=float(rng.choice([1.0, 1.3, 1.5, 1.7])), seed=int(rng.integers(2**31)),
                         target=500)
        _, b = oversample(d, cfg)
        X = d.features
        P, O, A = X[b.proxima_ids], X[b.orion_ids], X[b.anchor_ids]
        on_segment = b.q1[:, None] * P + b.q2[:, None] * O
        dev = np.abs(on_segment - b.points).max(axis=1)
        weights_ok = (b.q1 >= 0) & (b.q2 >= 0) & (np.abs(b.q1 + b.q2 - 1) <= 1e-12)
        outside += int(np.sum((dev > 1e-9) | ~weights_ok))
        worst_segment = max(worst_segment, float(dev.max()))
        anchored = A + b.q1[:, None] * (P - A) + b.q2[:, None] * (O - A)
        worst_forms = max(worst_forms, float(np.abs(anchored - on_segment).max()))
        total += len(b)
    ok = outside == 0 and worst_forms <= 1e-12
    detail = (f"{total} synthetics, {outside} off-segment (max dev {worst_segment:.1e}), "
              f"algebraic forms max gap {worst_forms:.1e}")
    assert record_criterion(2, "PO-QG geometry", ok, detail)


def test_criterion_3_weight_laws():
    rng = np.random.default_rng(3)
    sums_ok = telescoping_ok = True
    pvalues = []
    for i in range(20):
        d = random_dataset(rng, 60, 20, n_features=int(rng.integers(2, 5)))
        cfg = PoqgConfig(k=int(rng.choice([5, 7, 10])), alpha=float(rng.choice([0.3, 0.5, 0.7])))
        t = weight_table(d, int(rng.choice(d.class_indices(1))), cfg)
        sums_ok &= abs(t.normalized_weights.sum() - 1.0) <= 1e-12
        S = t.cumulative
        prev = np.r_[0.0, S[:-1]]
        telescoping_ok &= bool(np.allclose(S - prev, t.normalized_weights, rtol=0, atol=1e-15))
        telescoping_ok &= bool(np.allclose(S, np.cumsum(t.normalized_weights), rtol=0, atol=0))
        draw_rng = np.random.default_rng(1000 + i)
        pos = {int(j): n for n, j in enumerate(t.neighbor_indices)}
        counts = np.zeros(len(t.neighbor_indices))
        for _ in range(100_000):
            counts[pos[select_proxima_orion(t, draw_rng)[0]]] += 1
        pvalues.append(chisquare(counts, 100_000 * t.normalized_weights).pvalue)
    ok = sums_ok and telescoping_ok and min(pvalues) > 0.01
    detail = (f"sums {'ok' if sums_ok else 'off'}, S(n) telescoping "
              f"{'ok' if telescoping_ok else 'off'}, chi-square min p {min(pvalues):.3f} "
              f"over 20 tables x 1e5 draws")
    assert record_criterion(3, "weight laws", ok, detail)


def test_criterion_4_q_gaussian():
    beta = 0.1
    closed = (abs(q_gaussian_weight(beta, beta, 1.0) - math.exp(-0.5)) <= 1e-12
              and abs(q_gaussian_weight(beta, beta, 1.5) - 4 / 9) <= 1e-12)
    gaps = [abs(q_gaussian_weight(d, beta, q) - q_gaussian_weight(d, beta, 1.0))
            for d in np.linspace(0, 5 * beta, 51) for q in (1 - 1e-6, 1 + 1e-6)]
    continuous = max(gaps) < 1e-4
    grid = np.linspace(0, 10 * beta, 1001)
    monotone = all(np.all(np.diff(q_gaussian_weight(grid, beta, q)) <= 0) for q in (1.3, 1.5, 1.7))
    ok = closed and continuous and monotone
    detail = (f"closed forms {'ok' if closed else 'off'}; continuity at q->1 max gap "
              f"{max(gaps):.4f} (limit 1e-4); monotone {'ok' if monotone else 'off'}")
    assert record_criterion(4, "q-Gaussian", ok, detail)


def test_criterion_5_oracles():
    rng = np.random.default_rng(5)
    knn_mismatch = 0
    for _ in range(100):
        d = grid_dataset(rng, int(rng.integers(10, 201)))
        pts, labels = d.features.tolist(), d.labels.tolist()
        k = int(rng.integers(1, 6))
        for a in range(d.n_samples):
            knn_mismatch += knn_any(d, a, k).neighbor_indices.tolist() != oracle_knn(pts, labels, a, k)
            cls = labels[a]
            if labels.count(cls) > k:
                got = knn_within(d, cls, a, k).neighbor_indices.tolist()
                knn_mismatch += got != oracle_knn(pts, labels, a, k, cls)
    auc_gap = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 200))
        actual = rng.integers(0, 2, n)
        actual[:2] = [0, 1]
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        auc_gap = max(auc_gap, abs(roc_auc_rank(scores, actual) - trapezoid_auc(scores, actual)))
    p_gap = 0.0
    for n in range(5, 13):
        for _ in range(5):
            diff = np.round(rng.normal(0.2, 1.0, n), 1)
            if np.count_nonzero(diff) < 5:
                continue
            p, _ = brute_force_p(diff)
            p_gap = max(p_gap, abs(wilcoxon_signed_rank(diff, np.zeros(n), "exact").p_value - p))
    ok = knn_mismatch == 0 and auc_gap <= 1e-12 and p_gap <= 1e-12
    detail = (f"kNN mismatches {knn_mismatch}/100 trials; AUC max gap {auc_gap:.1e}; "
              f"Wilcoxon exact max gap {p_gap:.1e}")
    assert record_criterion(5, "oracle equivalence", ok, detail)


def test_criterion_6_trend():
    start = time.perf_counter()
    data = all_fixtures()
    lines, gm_ok, auc_wins = [], 0, 0
    fixtures = list(TREND_CONFIGS)
    for name in fixtures:
        d = data[name]
        assert name == "case_study" or stats(d).imbalance_ratio > 9
        k, alpha, beta, q = TREND_CONFIGS[name]
        folds = stratified_folds(d, 5, 0)
        runs = {}
        for method, params in (("none", {}), ("smote", {}),
                               ("poqg", dict(k=k, alpha=alpha, beta=beta, q=q))):
            runs[method] = cross_validate(d, make_resampler(method, params), KNNClassifier(5),
                                          folds, seed=0, method=method)
        gm = (runs["poqg"].mean("g_mean"), runs["none"].mean("g_mean"))
        auc = (runs["poqg"].mean("roc_auc"), runs["smote"].mean("roc_auc"))
        gm_ok += gm[0] >= gm[1]
        auc_wins += auc[0] >= auc[1]
        lines.append(f"{name}: G-Mean {gm[0]:.4f} vs none {gm[1]:.4f}, "
                     f"AUC {auc[0]:.4f} vs SMOTE {auc[1]:.4f}")
    elapsed = time.perf_counter() - start
    n = len(fixtures)
    ok = gm_ok == n and auc_wins >= n / 2 and elapsed < 300 and n - 1 >= 5
    detail = (f"G-Mean >= none on {gm_ok}/{n}, AUC >= SMOTE on {auc_wins}/{n}, "
              f"{elapsed:.1f}s | " + "; ".join(lines))
    assert record_criterion(6, "desk-scale trend", ok, detail)


def test_criterion_7_wilcoxon_example():
    diff = [1, 2, 3, 4, 5, 6]
    r = wilcoxon_signed_rank(np.array(diff, float), np.zeros(6))
    p, r_plus = brute_force_p(diff)
    ok = (r.r_plus, r.r_minus) == (21.0, 0.0) and r_plus == 21 and p == 0.03125
    ok &= abs(r.p_value - 0.03125) <= 1e-15
    detail = f"R+={r.r_plus:g}, R-={r.r_minus:g}, p={r.p_value} (enumeration {p})"
    assert record_criterion(7, "Wilcoxon worked example", ok, detail)


def _report_files(directory):
    root = Path(directory)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "timings.csv"}


def test_criterion_8_determinism(tmp_path):
    save_csv(make_case_study(0), tmp_path / "case_study.csv")
    argv = ["compare", str(tmp_path / "case_study.csv"), str(KEEL_DIR / "ecoli4.dat"),
            str(KEEL_DIR / "glass-0-1-6_vs_5.dat"), "--seed", "7"]
    codes = [cli.main(argv + ["--outdir", str(tmp_path / "first")]),
             cli.main(argv + ["--outdir", str(tmp_path / "second")]),
             cli.main(["--replay", str(tmp_path / "first" / "run.json"),
                       "--outdir", str(tmp_path / "replayed")])]
    first = _report_files(tmp_path / "first")
    same = first == _report_files(tmp_path / "second")
    replayed = first == _report_files(tmp_path / "replayed")
    ok = codes == [0, 0, 0] and same and replayed and len(first) > 10
    detail = (f"{len(first)} report files; rerun identical {same}; replay identical {replayed}; "
              f"exit codes {codes}")
    assert record_criterion(8, "determinism", ok, detail)


class _Canary(BaseResampler):
    """Appends one row copied from outside the training fold."""

    method = "canary"

    def __init__(self, full=None, random_state=None):
        self.full = full
        self.random_state = random_state

    def resample(self, d):
        i = self.full.n_samples - 1
        batch = SyntheticBatch.from_records(self.full.features[[i]], [i], [i], [i], [1.0], [0.0],
                                            d.n_features, method=self.method)
        return Resampled.from_generation(d, batch)


def test_criterion_9_leakage(monkeypatch):
    d = load_fixture("ecoli4")
    folds = stratified_folds(d, 5, 0)
    checked = []
    original = evaluation.check_no_leakage

    def spy(result, train_idx, test_idx, train_features=None, atol=1e-9):
        original(result, train_idx, test_idx, train_features, atol)
        b = result.batch
        if len(b):
            global_ids = np.asarray(train_idx)[b.referenced_ids()]
            assert not np.isin(global_ids, test_idx).any()
            rebuilt = (b.q1[:, None] * d.features[np.asarray(train_idx)[b.proxima_ids]]
                       + b.q2[:, None] * d.features[np.asarray(train_idx)[b.orion_ids]])
            assert np.allclose(rebuilt, b.points, rtol=0, atol=1e-9)
        checked.append(len(b))

    monkeypatch.setattr(evaluation, "check_no_leakage", spy)
    for method in RESAMPLER_NAMES:
        cross_validate(d, make_resampler(method), KNNClassifier(5), folds, seed=0)
    all_folds_checked = len(checked) == len(RESAMPLER_NAMES) * folds.n_folds and min(checked) > 0
    try:
        cross_validate(d, _Canary(full=d), KNNClassifier(5), folds, seed=0)
        canary_caught = False
    except LeakageError:
        canary_caught = True
    ok = all_folds_checked and canary_caught
    detail = (f"{len(checked)} folds checked across {len(RESAMPLER_NAMES)} resamplers, "
              f"{sum(checked)} synthetic rows clean; injected canary caught {canary_caught}")
    assert record_criterion(9, "leakage guard", ok, detail)
