"""Command-line front end.

Subcommands: ``resample``, ``compare``, ``grid``, ``demo`` and ``check-hull``.
Every run writes ``run.json`` with its resolved arguments; ``poqg --replay
run.json [--outdir DIR]`` repeats it.  Exit codes: 0 ok, 1 failed check,
2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import itertools
import json
import math
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .base import ConfigError
from .core import DEFAULT_GRID
from .data import DataError, load_csv, load_keel, make_case_study, save_csv, stats, stratified_folds
from .evaluation import cross_validate
from .registry import (
    CLASSIFIERS, RESAMPLERS, TABLE_ORDER, display_name, make_classifier, make_resampler,
)
from .stats import compare_methods

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3, 4

BASELINE_METHODS = ("adasyn", "borderline_smote", "smote", "smote_enn", "smote_tomek")
ALL_METHODS = BASELINE_METHODS + ("poqg",)

# keys never written to run.json (they do not change artifact contents)
_UNRECORDED = {"config", "outdir", "jobs", "func", "replay", "replay_outdir"}

POQG_FLAGS = ("k", "alpha", "beta", "q", "target", "anchor_mode", "density_denominator")
BASELINE_FLAGS = ("k_neighbors", "m_neighbors", "kind", "enn_neighbors", "n_neighbors")


def _default_seed():
    raw = os.environ.get("POQG_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"POQG_SEED must be an integer, got {raw!r}") from None


def _json_arg(text):
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from None
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


# ---------------------------------------------------------------- loading

def load_dataset(path, nominal="reject", label_column=-1, minority_label=None):
    """Load a KEEL ``.dat`` or CSV file; the dataset is named after the file stem."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    if path.suffix.lower() == ".csv":
        d = load_csv(path, label_column=label_column, minority_label=minority_label)
    else:
        d = load_keel(path, nominal=nominal)
    return d.subset(np.arange(d.n_samples), name=path.stem)


def _expand(patterns):
    paths = []
    for pattern in patterns:
        matches = sorted(glob.glob(pattern))
        if not matches:
            raise DataError(f"{pattern}: no such file")
        paths.extend(m for m in matches if m not in paths)
    return paths


# ---------------------------------------------------------------- parameters

def _method_params(args, method, explicit_only=False):
    """Estimator parameters for ``method`` from flags and ``--method-params``."""
    accepted = set(RESAMPLERS[method]().get_params())
    params = {}
    if explicit_only:
        flags = POQG_FLAGS + BASELINE_FLAGS
    else:
        flags = POQG_FLAGS if method == "poqg" else BASELINE_FLAGS
    for name in flags:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name not in accepted:
            if explicit_only:
                raise ConfigError(f"--{name.replace('_', '-')} does not apply to method {method}")
            continue
        params[name] = value
    params.update((args.method_params or {}).get(method, {}))
    return params


def _resampler(args, method, seed, explicit_only=False):
    params = _method_params(args, method, explicit_only)
    params["random_state"] = seed
    return make_resampler(method, params)


def _classifier(args):
    return make_classifier(args.classifier, args.classifier_params or {})


# ---------------------------------------------------------------- writing

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_rows(path, rows, header=None):
    header = header or (list(rows[0]) if rows else [])
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(h, "")) for h in header])


def write_json(path, payload):
    Path(path).write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _run_record(args):
    record = {k: v for k, v in vars(args).items() if k not in _UNRECORDED}
    return {"tool": "poqg", "version": __version__, "args": record}


# ---------------------------------------------------------------- resample

def cmd_resample(args):
    d = load_dataset(args.input, args.nominal, args.label_column, args.minority_label)
    resampler = _resampler(args, args.method, args.seed, explicit_only=True)
    result = resampler.resample(d)
    before, after = stats(d), stats(result.dataset)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(result.dataset, out / "resampled.csv", synthetic=result.synthetic)
    result.batch.to_csv(out / "provenance.csv", d.feature_names, kept=result.kept)
    write_json(out / "run.json", _run_record(args))
    print(
        f"{d.name}: {before.n_majority}/{before.n_minority} -> "
        f"{after.n_majority}/{after.n_minority}; {len(result.batch)} synthetic rows, "
        f"{int(result.kept.sum())} kept"
    )
    return EXIT_OK


# ---------------------------------------------------------------- compare

def _run_cell(task):
    d, method, resampler, classifier, classifier_name, folds, seed, scale = task
    start = time.perf_counter()
    try:
        report = cross_validate(d, resampler, classifier, folds, seed, scale,
                                method=method, classifier_name=classifier_name)
        return d.name, method, report, None, time.perf_counter() - start
    except (DataError, ValueError, RuntimeError) as exc:
        return d.name, method, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start


def _map(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, tasks))
    return [_run_cell(t) for t in tasks]


def _ordered(methods):
    return sorted(methods, key=lambda m: (TABLE_ORDER.index(m) if m in TABLE_ORDER else 99, m))


def _score_cell(report, metric):
    if report is None:
        return "failed"
    mean, std = report.mean(metric), report.std(metric)
    if math.isnan(mean):
        return "undefined"
    return f"{mean:.4f} ± {std:.4f}"


METRIC_LABELS = {
    "roc_auc": "ROC-AUC (rank statistic)",
    "g_mean": "G-Mean sqrt(TPR*TNR)",
    "paper_literal_auc": "literal AUC (TPR+FPR)/2, diagnostic only",
    "paper_literal_gmean": "literal G-Mean sqrt(TPR*FPR), diagnostic only",
}


def _markdown_report(cells, datasets, methods, comparisons, failures, metrics_shown, args):
    lines = [f"# Method comparison ({args.folds}-fold CV, classifier {args.classifier}, "
             f"seed {args.seed})", ""]
    for metric in metrics_shown:
        lines += [f"## {METRIC_LABELS[metric]}", ""]
        lines.append("| dataset | " + " | ".join(display_name(m) for m in methods) + " |")
        lines.append("|---|" + "---|" * len(methods))
        for ds in datasets:
            vals = [_score_cell(cells.get((ds, m)), metric) for m in methods]
            lines.append(f"| {ds} | " + " | ".join(vals) + " |")
        if metric in comparisons:
            wins = comparisons[metric].wins
            lines.append("| winning times | "
                         + " | ".join(f"{wins.get(m, 0.0):g}" for m in methods) + " |")
        lines.append("")
    for metric, table in comparisons.items():
        lines += [f"## Wilcoxon signed-rank test, {METRIC_LABELS[metric]}", "",
                  table.to_markdown().rstrip("\n"), ""]
    if failures:
        lines += ["## Failed cells", ""]
        lines += [f"- {ds} / {display_name(m)}: {msg}" for ds, m, msg in failures]
        lines.append("")
    return "\n".join(lines)


def cmd_compare(args):
    methods = _ordered(dict.fromkeys(args.methods))
    if len(methods) < 2:
        raise ConfigError("compare needs at least two methods")
    for m in methods:
        if m not in RESAMPLERS:
            raise ConfigError(f"unknown method {m!r}; choose from {sorted(RESAMPLERS)}")
    classifier = _classifier(args)
    paths = _expand(args.datasets)
    data = [load_dataset(p, args.nominal, args.label_column, args.minority_label) for p in paths]
    names = [d.name for d in data]
    if len(set(names)) != len(names):
        raise DataError(f"dataset names (file stems) must be unique: {names}")

    tasks, plan_errors = [], []
    for d in data:
        try:
            folds = stratified_folds(d, args.folds, args.seed)
        except DataError as exc:
            plan_errors += [(d.name, m, f"{type(exc).__name__}: {exc}") for m in methods]
            continue
        for m in methods:
            tasks.append((d, m, _resampler(args, m, args.seed), classifier, args.classifier,
                          folds, args.seed, args.scale))
    results = _map(tasks, args.jobs)
    results.sort(key=lambda r: (r[0], methods.index(r[1])))

    cells = {(ds, m): rep for ds, m, rep, _, _ in results}
    failures = sorted(plan_errors + [(ds, m, err) for ds, m, _, err, _ in results if err],
                      key=lambda f: (f[0], methods.index(f[1])))
    reports = [rep for rep in cells.values() if rep is not None]
    datasets = sorted(names)

    out = Path(args.outdir)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    for rep in reports:
        stem = f"{rep.dataset}__{rep.method}"
        write_rows(out / "reports" / f"{stem}.csv", rep.rows(args.paper_literal))
        (out / "reports" / f"{stem}.json").write_text(rep.to_json(args.paper_literal) + "\n")
    write_rows(out / "summary.csv", [r.summary(args.paper_literal) for r in sorted(
        reports, key=lambda r: (r.dataset, methods.index(r.method)))])

    reference = "poqg" if "poqg" in methods else methods[0]
    comparisons = {}
    metrics_shown = ["roc_auc", "g_mean"]
    if args.paper_literal:
        metrics_shown += ["paper_literal_auc", "paper_literal_gmean"]
    for metric in ("roc_auc", "g_mean"):
        table = compare_methods(reports, metric, reference, methods, strict=False)
        comparisons[metric] = table
        (out / f"wilcoxon_{metric}.csv").write_text(table.to_csv())
        (out / f"wilcoxon_{metric}.md").write_text(table.to_markdown())
        write_rows(out / f"winning_times_{metric}.csv",
                   [{"method": m, "wins": table.wins[m]} for m in methods])
    (out / "report.md").write_text(
        _markdown_report(cells, datasets, methods, comparisons, failures, metrics_shown, args)
    )
    write_rows(out / "failures.csv",
               [{"dataset": ds, "method": m, "error": e} for ds, m, e in failures],
               header=["dataset", "method", "error"])
    # wall time varies between runs, so it lives apart from the report files
    write_rows(out / "timings.csv",
               [{"dataset": ds, "method": m, "seconds": t} for ds, m, _, _, t in results],
               header=["dataset", "method", "seconds"])
    write_json(out / "run.json", _run_record(args))
    for ds, m, e in failures:
        print(f"warning: {ds} / {m} failed: {e}", file=sys.stderr)
    print(f"{len(reports)} of {len(datasets) * len(methods)} cells evaluated; report at "
          f"{out / 'report.md'}")
    return EXIT_OK if reports else EXIT_DATA


# ---------------------------------------------------------------- grid

def grid_combinations(args):
    axes = [args.k, args.alpha, args.beta, args.q]
    if any(not axis for axis in axes):
        raise ConfigError("grid is empty: every axis needs at least one value")
    return [dict(zip(("k", "alpha", "beta", "q"), combo)) for combo in itertools.product(*axes)]


def best_row(rows):
    """Highest mean ROC-AUC, then higher G-Mean, then the smallest config tuple."""
    def key(r):
        auc = r["mean_roc_auc"]
        gm = r["mean_g_mean"]
        return (-(auc if not math.isnan(auc) else -math.inf),
                -(gm if not math.isnan(gm) else -math.inf),
                (r["k"], r["alpha"], r["beta"], r["q"]))
    return min(rows, key=key)


def cmd_grid(args):
    combos = grid_combinations(args)
    classifier = _classifier(args)
    d = load_dataset(args.dataset, args.nominal, args.label_column, args.minority_label)
    folds = stratified_folds(d, args.folds, args.seed)
    extra = (args.method_params or {}).get("poqg", {})
    tasks = [
        (d, "poqg", make_resampler("poqg", {**extra, **c, "random_state": args.seed}),
         classifier, args.classifier, folds, args.seed, args.scale)
        for c in combos
    ]
    results = _map(tasks, args.jobs)
    rows = []
    for combo, (_, _, rep, err, _) in zip(combos, results):
        row = dict(combo)
        for metric in ("roc_auc", "g_mean"):
            row[f"mean_{metric}"] = rep.mean(metric) if rep else math.nan
            row[f"std_{metric}"] = rep.std(metric) if rep else math.nan
        row["n_undefined_folds"] = rep.n_undefined if rep else args.folds
        row["error"] = err or ""
        rows.append(row)
    if all(r["error"] for r in rows):
        raise DataError(f"every grid cell failed, e.g. {rows[0]['error']}")
    best = best_row(rows)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "sweep.csv", rows)
    write_rows(out / "best.csv", [best], header=list(rows[0]))
    write_json(out / "run.json", _run_record(args))
    print(f"{len(rows)} combinations on {d.name}; best k={best['k']} alpha={best['alpha']} "
          f"beta={best['beta']} q={best['q']} roc_auc={best['mean_roc_auc']:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------- demo

def cmd_demo(args):
    d = make_case_study(args.seed)
    results = {}
    for m in ALL_METHODS:
        results[m] = _resampler(args, m, args.seed).resample(d)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(d, out / "case_study.csv")
    for m, r in results.items():
        r.batch.to_csv(out / f"synthetic_{m}.csv", d.feature_names, kept=r.kept)
        rows = [{"x0": x[0], "x1": x[1], "label": int(y), "kind": "original", "kept": 1}
                for x, y in zip(d.features, d.labels)]
        rows += [{"x0": x[0], "x1": x[1], "label": 1, "kind": "synthetic", "kept": int(k)}
                 for x, k in zip(r.batch.points, r.kept)]
        write_rows(out / f"scatter_{m}.csv", rows)
        print(f"{display_name(m)}: {len(r.batch)} synthetic rows, {int(r.kept.sum())} kept")
    write_json(out / "run.json", _run_record(args))
    return EXIT_OK


# ---------------------------------------------------------------- check-hull

def points_in_hull(reference, points, tol=1e-9):
    """Boolean mask of ``points`` inside the convex hull of ``reference``.

    Flat reference sets (a constant column, collinear rows) are handled by
    working in the affine span of ``reference``: points farther than ``tol``
    from the span are outside, the rest are tested in span coordinates.
    """
    from scipy.spatial import ConvexHull
    from scipy.spatial import QhullError

    reference = np.asarray(reference, dtype=float)
    points = np.asarray(points, dtype=float)
    origin = reference[0]
    _, sv, vt = np.linalg.svd(reference - origin, full_matrices=False)
    scale = max(1.0, float(np.abs(reference).max()))
    basis = vt[sv > 1e-10 * scale * max(reference.shape)]
    offsets = points - origin
    coords = offsets @ basis.T
    on_span = np.linalg.norm(offsets - coords @ basis, axis=1) <= tol
    if basis.shape[0] == 0:
        return on_span
    ref_coords = (reference - origin) @ basis.T
    if basis.shape[0] == 1:
        lo, hi = ref_coords.min(), ref_coords.max()
        return on_span & (coords[:, 0] >= lo - tol) & (coords[:, 0] <= hi + tol)
    try:
        hull = ConvexHull(ref_coords)
    except QhullError as exc:
        raise DataError(f"minority hull is degenerate: {exc}") from None
    A, b = hull.equations[:, :-1], hull.equations[:, -1]
    return on_span & np.all(coords @ A.T + b <= tol, axis=1)


def _read_feature_rows(path, n_features):
    """Leading feature columns; with a ``synthetic`` column only rows flagged 1."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if "synthetic" in header:
        col = header.index("synthetic")
        body = [r for r in body if r[col].strip() == "1"]
    try:
        return np.array([[float(v) for v in r[:n_features]] for r in body]).reshape(
            -1, n_features)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_check_hull(args):
    d = load_dataset(args.reference, args.nominal, args.label_column, args.minority_label)
    points = _read_feature_rows(args.synthetic, d.n_features)
    inside = points_in_hull(d.features[d.labels == 1], points, args.tol)
    print(f"{int(inside.sum())} of {len(inside)} synthetic rows inside the minority hull")
    for i in np.flatnonzero(~inside)[:10]:
        print(f"  row {i} outside", file=sys.stderr)
    return EXIT_OK if inside.all() else EXIT_CHECK


# ---------------------------------------------------------------- parser

def _add_data_flags(p):
    p.add_argument("--nominal", choices=("reject", "drop"), default="reject",
                   help="how to treat nominal KEEL attributes")
    p.add_argument("--label-column", type=int, default=-1, help="CSV label column")
    p.add_argument("--minority-label", default=None, help="CSV minority label value")


def _add_method_flags(p):
    g = p.add_argument_group("PO-QG parameters")
    g.add_argument("--k", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--target", type=int)
    g.add_argument("--anchor-mode", choices=("random", "round_robin"))
    g.add_argument("--density-denominator", choices=("majority", "all"))
    g = p.add_argument_group("baseline parameters")
    g.add_argument("--k-neighbors", type=int)
    g.add_argument("--n-neighbors", type=int, help="ADASYN neighbourhood size")
    g.add_argument("--m-neighbors", type=int, help="Borderline-SMOTE danger neighbourhood")
    g.add_argument("--kind", choices=("borderline-1", "borderline-2"))
    g.add_argument("--enn-neighbors", type=int)
    p.add_argument("--method-params", type=_json_arg, default=None,
                   help='per-method parameters, e.g. \'{"smote": {"k_neighbors": 3}}\'')


def _add_eval_flags(p):
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--classifier", choices=sorted(CLASSIFIERS), default="knn")
    p.add_argument("--classifier-params", type=_json_arg, default=None)
    p.add_argument("--scale", action="store_true",
                   help="min-max scale features using training-fold bounds")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser():
    parser = argparse.ArgumentParser(prog="poqg", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--replay", metavar="RUN_JSON",
                        help="repeat the run recorded in RUN_JSON")
    parser.add_argument("--outdir", dest="replay_outdir", metavar="DIR",
                        help="with --replay: write to DIR instead")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON file of option values (flags override it)")
        p.add_argument("--seed", type=int, default=None, help="default: $POQG_SEED or 0")

    p = sub.add_parser("resample", help="oversample one dataset")
    p.add_argument("input")
    p.add_argument("outdir")
    p.add_argument("--method", choices=sorted(RESAMPLERS), default="poqg")
    _add_method_flags(p)
    _add_data_flags(p)
    common(p)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("compare", help="cross-validate several methods")
    p.add_argument("datasets", nargs="+", help="dataset files or glob patterns")
    p.add_argument("--methods", nargs="+", default=list(ALL_METHODS))
    p.add_argument("--outdir", required=False, default=None)
    p.add_argument("--paper-literal", action="store_true",
                   help="also emit the literal FPR-based G-Mean and AUC diagnostics")
    _add_eval_flags(p)
    _add_method_flags(p)
    _add_data_flags(p)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("grid", help="PO-QG hyperparameter grid search")
    p.add_argument("dataset")
    p.add_argument("--outdir", default=None)
    p.add_argument("--k", nargs="*", type=int, default=list(DEFAULT_GRID["k"]))
    p.add_argument("--alpha", nargs="*", type=float, default=list(DEFAULT_GRID["alpha"]))
    p.add_argument("--beta", nargs="*", type=float, default=list(DEFAULT_GRID["beta"]))
    p.add_argument("--q", nargs="*", type=float, default=list(DEFAULT_GRID["q"]))
    p.add_argument("--method-params", type=_json_arg, default=None)
    _add_eval_flags(p)
    _add_data_flags(p)
    common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("demo", help="case-study dataset through all six methods")
    p.add_argument("outdir")
    _add_method_flags(p)
    common(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("check-hull", help="check synthetic rows lie in the minority hull")
    p.add_argument("synthetic", help="CSV whose leading columns are features")
    p.add_argument("reference", help="dataset whose minority rows define the hull")
    p.add_argument("--tol", type=float, default=1e-9)
    _add_data_flags(p)
    common(p)
    p.set_defaults(func=cmd_check_hull)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _dests(subparser):
    return {a.dest for a in subparser._actions if a.dest != "help"}


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        return args
    sub = _subparser(parser, args.command)
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ConfigError(f"{args.config}: no such config file") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(values) - (_dests(sub) - {"config", "func"}))
        if unknown:
            raise ConfigError(f"{args.config}: unknown key(s) {unknown}")
        # values from the file become defaults, so explicit flags still win
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    if args.command in ("compare", "grid") and args.outdir is None:
        raise ConfigError(f"{args.command} needs --outdir")
    return args


def replay(path, outdir=None):
    try:
        record = json.loads(Path(path).read_text())
        values = dict(record["args"])
        command = values.pop("command")
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such run file") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a run record ({exc})") from None
    parser = build_parser()
    sub = _subparser(parser, command)
    unknown = sorted(set(values) - _dests(sub) - {"replay", "replay_outdir"})
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}")
    args = argparse.Namespace(**{a.dest: a.default for a in sub._actions if a.dest != "help"})
    vars(args).update(values)
    args.command = command
    args.outdir = outdir or str(Path(path).resolve().parent)
    args.jobs = 1
    args.config = None
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        if args.replay:
            if args.command:
                raise ConfigError("--replay cannot be combined with a subcommand")
            args = replay(args.replay, args.replay_outdir)
        elif args.command is None:
            build_parser().print_usage(sys.stderr)
            return EXIT_CONFIG
        return _subparser(build_parser(), args.command).get_default("func")(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
