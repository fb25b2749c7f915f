"""Wilcoxon signed-rank test and the paired method-comparison table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, rankdata

__all__ = [
    "WilcoxonResult",
    "InsufficientPairsError",
    "wilcoxon_signed_rank",
    "exact_null_counts",
    "ComparisonRow",
    "ComparisonTable",
    "score_table",
    "winning_times",
    "compare_methods",
]

EXACT_MAX_N = 25
MIN_PAIRS = 5


class InsufficientPairsError(ValueError):
    pass


@dataclass(frozen=True)
class WilcoxonResult:
    r_plus: float
    r_minus: float
    n_effective: int
    p_value: float
    method: str
    n_zero: int = 0


def exact_null_counts(doubled_ranks):
    """Number of sign assignments giving each value of ``2 * R+``.

    ``doubled_ranks`` are integers (average ranks times two), so ties are
    handled exactly.  Entry ``s`` of the result counts subsets summing to ``s``.
    """
    doubled_ranks = [int(r) for r in doubled_ranks]
    counts = np.zeros(sum(doubled_ranks) + 1)
    counts[0] = 1.0
    for r in doubled_ranks:
        counts[r:] = counts[r:] + counts[:-r]
    return counts


def _exact_p(doubled_ranks, t):
    counts = exact_null_counts(doubled_ranks)
    total = counts.sum()
    lower = counts[: t + 1].sum() / total
    upper = counts[t:].sum() / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def _approx_p(r_plus, n, ranks):
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    diff = r_plus - mean
    # continuity correction toward the mean
    z = (abs(diff) - 0.5) / math.sqrt(var) if abs(diff) >= 0.5 else 0.0
    return min(1.0, 2.0 * float(norm.sf(z)))


def wilcoxon_signed_rank(a, b, method="auto"):
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Parameters
    ----------
    a, b : array-like
        Paired observations; differences are ``a - b``.
    method : {"auto", "exact", "approx"}
        ``"auto"`` enumerates the null exactly for up to 25 nonzero
        differences and uses the normal approximation (continuity and tie
        corrected) above that.

    Zero differences are dropped and tied magnitudes share average ranks.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired vectors must have equal length, got {a.shape} and {b.shape}")
    diff = a - b
    nonzero = diff[diff != 0]
    n_zero = diff.size - nonzero.size
    if nonzero.size == 0:
        raise InsufficientPairsError("all differences are zero")
    n = nonzero.size
    if n < MIN_PAIRS:
        raise InsufficientPairsError(
            f"insufficient pairs: {n} nonzero differences, need at least {MIN_PAIRS}"
        )
    ranks = rankdata(np.abs(nonzero))
    r_plus = float(ranks[nonzero > 0].sum())
    r_minus = float(ranks[nonzero < 0].sum())
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "approx"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = _exact_p(doubled, int(round(2 * r_plus)))
        label = "exact"
    elif method == "approx":
        p = _approx_p(r_plus, n, ranks)
        label = "normal_approximation"
    else:
        raise ValueError(f"method must be 'auto', 'exact' or 'approx', got {method!r}")
    return WilcoxonResult(r_plus, r_minus, n, p, label, n_zero)


@dataclass(frozen=True)
class ComparisonRow:
    reference: str
    baseline: str
    metric: str
    n_common: int
    n_excluded: int
    result: WilcoxonResult | None
    note: str = ""

    @property
    def label(self):
        return f"{self.reference} vs {self.baseline}"

    @property
    def significant(self):
        return self.result is not None and self.result.p_value < 0.05

    def cells(self):
        r = self.result
        if r is None:
            return [self.label, "", "", "", "", "", self.note]
        return [self.label, _fmt(r.r_plus), _fmt(r.r_minus), str(r.n_effective),
                repr(r.p_value), "yes" if self.significant else "no", self.note]


def _fmt(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass
class ComparisonTable:
    metric: str
    rows: list = field(default_factory=list)
    wins: dict = field(default_factory=dict)
    n_datasets: int = 0

    HEADER = ["comparison", "R+", "R-", "n_eff", "p", "significant@0.05", "note"]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.HEADER)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()

    def to_markdown(self):
        lines = [
            "| " + " | ".join(self.HEADER) + " |",
            "|" + "---|" * len(self.HEADER),
        ]
        for row in self.rows:
            lines.append("| " + " | ".join(row.cells()) + " |")
        return "\n".join(lines) + "\n"


def score_table(reports, metric):
    """``{dataset: {method: mean metric}}`` from a collection of EvalReports."""
    table = {}
    for r in reports:
        table.setdefault(r.dataset, {})[r.method] = r.mean(metric)
    return table


def winning_times(table, methods):
    """Datasets on which each method attains the best value.

    A tie between ``m`` methods credits each with ``1/m``; undefined values
    never win, so the counts sum to the number of datasets with at least one
    defined value.
    """
    wins = {m: 0.0 for m in methods}
    for scores in table.values():
        vals = {m: scores.get(m, math.nan) for m in methods}
        defined = {m: v for m, v in vals.items() if not math.isnan(v)}
        if not defined:
            continue
        best = max(defined.values())
        tied = [m for m, v in defined.items() if v == best]
        for m in tied:
            wins[m] += 1.0 / len(tied)
    return wins


def compare_methods(reports, metric="roc_auc", reference="poqg", methods=None, strict=True):
    """Wilcoxon test of ``reference`` against every other method.

    Datasets where either method is undefined are dropped pairwise and
    counted in ``n_excluded``.  With ``strict`` a comparison with fewer than
    five usable datasets raises; otherwise its row carries a note and no
    statistics.
    """
    reports = list(reports)
    table = score_table(reports, metric)
    if methods is None:
        methods = sorted({r.method for r in reports})
    if reference not in methods:
        raise ValueError(f"reference method {reference!r} has no reports")
    out = ComparisonTable(metric, wins=winning_times(table, methods), n_datasets=len(table))
    datasets = sorted(table)
    for other in methods:
        if other == reference:
            continue
        a, b = [], []
        excluded = 0
        for ds in datasets:
            x = table[ds].get(reference, math.nan)
            y = table[ds].get(other, math.nan)
            if math.isnan(x) or math.isnan(y):
                excluded += 1
                continue
            a.append(x)
            b.append(y)
        try:
            if len(a) < MIN_PAIRS:
                raise InsufficientPairsError(
                    f"insufficient pairs: {len(a)} common datasets, need at least {MIN_PAIRS}"
                )
            result, note = wilcoxon_signed_rank(a, b), ""
        except InsufficientPairsError as exc:
            if strict:
                raise
            result, note = None, str(exc)
        out.rows.append(ComparisonRow(reference, other, metric, len(a), excluded, result, note))
    return out
