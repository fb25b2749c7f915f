from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import KEEL_DIR
from poqg import cli
from poqg.data import load_csv, make_case_study, save_csv, stats


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def snapshot(directory, skip=("timings.csv",)):
    root = Path(directory)
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and p.name not in skip}


@pytest.fixture(scope="module")
def case_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "case.csv"
    save_csv(make_case_study(0), p)
    return p


@pytest.fixture(scope="module")
def small_csvs(tmp_path_factory):
    root = tmp_path_factory.mktemp("many")
    for seed in range(5):
        save_csv(make_case_study(seed), root / f"case{seed}.csv")
    return root


# ---------------------------------------------------------------- resample

def test_resample_table_config_on_abalone19(tmp_path):
    src = KEEL_DIR / "abalone19.dat"
    before = src.read_bytes()
    code = run("resample", "--method", "poqg", "--k", 5, "--alpha", 0.5, "--beta", 0.1,
               "--q", 1.7, "--seed", 42, "--nominal", "drop", src, tmp_path / "out")
    assert code == 0
    out = load_csv(tmp_path / "out" / "resampled.csv", label_column="label",
                   minority_label="1", exclude_columns=("synthetic",))
    s = stats(out)
    assert s.n_majority == s.n_minority == 4142
    rows = read_csv(tmp_path / "out" / "resampled.csv")
    assert sum(int(r["synthetic"]) for r in rows) == 4142 - 32
    prov = read_csv(tmp_path / "out" / "provenance.csv")
    assert len(prov) == 4110
    assert set(prov[0]) >= {"anchor_id", "proxima_id", "orion_id", "q1", "q2", "kept"}
    record = json.loads((tmp_path / "out" / "run.json").read_text())
    assert record["args"]["q"] == 1.7 and record["args"]["seed"] == 42
    assert src.read_bytes() == before


def test_resample_twice_is_byte_identical(tmp_path, case_csv):
    for name in ("a", "b"):
        assert run("resample", case_csv, tmp_path / name, "--seed", 3) == 0
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_resample_missing_file_leaves_nothing(tmp_path, capsys):
    code = run("resample", tmp_path / "nope.dat", tmp_path / "out")
    assert code == 3
    assert not (tmp_path / "out").exists()
    assert "no such file" in capsys.readouterr().err


def test_resample_config_errors(tmp_path, case_csv, capsys):
    assert run("resample", case_csv, tmp_path / "o", "--k", 1) == 2
    assert run("resample", case_csv, tmp_path / "o", "--method", "smote", "--alpha", 0.3) == 2
    assert "does not apply" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_resample_baseline_with_cleaning(tmp_path, case_csv):
    assert run("resample", case_csv, tmp_path / "o", "--method", "smote_enn") == 0
    prov = read_csv(tmp_path / "o" / "provenance.csv")
    assert len(prov) == 179
    kept = sum(int(r["kept"]) for r in prov)
    rows = read_csv(tmp_path / "o" / "resampled.csv")
    assert sum(int(r["synthetic"]) for r in rows) == kept


def test_config_file_and_flag_precedence(tmp_path, case_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 7, "q": 1.3, "seed": 11}))
    assert run("resample", case_csv, tmp_path / "o", "--config", cfg, "--q", 1.5) == 0
    args = json.loads((tmp_path / "o" / "run.json").read_text())["args"]
    assert (args["k"], args["q"], args["seed"]) == (7, 1.5, 11)
    cfg.write_text(json.dumps({"k": 7, "colour": "red"}))
    assert run("resample", case_csv, tmp_path / "o2", "--config", cfg) == 2


def test_seed_from_environment(tmp_path, case_csv, monkeypatch):
    monkeypatch.setenv("POQG_SEED", "9")
    assert run("resample", case_csv, tmp_path / "o") == 0
    assert json.loads((tmp_path / "o" / "run.json").read_text())["args"]["seed"] == 9
    monkeypatch.setenv("POQG_SEED", "nine")
    assert run("resample", case_csv, tmp_path / "o2") == 2


def test_internal_error_exit_code(tmp_path, case_csv, monkeypatch):
    def boom(args):
        raise KeyError("unexpected")
    monkeypatch.setattr(cli, "cmd_resample", boom)
    assert run("resample", case_csv, tmp_path / "o") == 4


# ---------------------------------------------------------------- compare

def test_compare_two_methods_one_dataset(tmp_path, case_csv):
    out = tmp_path / "c"
    assert run("compare", case_csv, "--methods", "smote", "poqg", "--outdir", out) == 0
    reports = sorted(p.name for p in (out / "reports").glob("*.json"))
    assert reports == ["case__poqg.json", "case__smote.json"]
    rows = read_csv(out / "wilcoxon_roc_auc.csv")
    assert len(rows) == 1 and rows[0]["comparison"] == "poqg vs smote"
    assert "insufficient pairs" in rows[0]["note"]


def test_compare_six_methods_header_order(tmp_path, case_csv):
    out = tmp_path / "c"
    assert run("compare", case_csv, "--outdir", out) == 0
    header = next(l for l in (out / "report.md").read_text().splitlines() if l.startswith("| dataset"))
    assert header == "| dataset | ADASYN | Boundary_SMOTE | SMOTE | SMOTE-ENN | SMOTE-TL | PO-QG |"


def test_compare_paper_literal_is_opt_in(tmp_path, case_csv):
    plain, literal = tmp_path / "p", tmp_path / "l"
    assert run("compare", case_csv, "--methods", "none", "poqg", "--outdir", plain) == 0
    assert run("compare", case_csv, "--methods", "none", "poqg", "--outdir", literal,
               "--paper-literal") == 0
    assert "paper_literal_gmean" not in read_csv(plain / "reports" / "case__poqg.csv")[0]
    assert "paper_literal_gmean" in read_csv(literal / "reports" / "case__poqg.csv")[0]
    assert "diagnostic only" in (literal / "report.md").read_text()
    assert "diagnostic only" not in (plain / "report.md").read_text()


def test_compare_isolates_failing_cells(tmp_path, case_csv):
    tiny = tmp_path / "tiny.csv"
    tiny.write_text("x,label\n" + "".join(f"{i},{int(i % 10 == 0)}\n" for i in range(40)))
    out = tmp_path / "c"
    code = run("compare", case_csv, tiny, "--methods", "smote", "poqg", "--outdir", out)
    assert code == 0
    failures = read_csv(out / "failures.csv")
    assert {f["dataset"] for f in failures} == {"tiny"}
    assert run("compare", tiny, "--methods", "smote", "poqg", "--outdir", tmp_path / "d") == 3


def test_compare_jobs_and_replay_reproduce_bytes(tmp_path, small_csvs):
    pattern = str(small_csvs / "case*.csv")
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run("compare", pattern, "--methods", "smote", "poqg", "--outdir", a) == 0
    assert run("compare", pattern, "--methods", "smote", "poqg", "--outdir", b, "--jobs", 2) == 0
    assert run("--replay", a / "run.json", "--outdir", c) == 0
    assert snapshot(a) == snapshot(b) == snapshot(c)
    rows = read_csv(a / "wilcoxon_g_mean.csv")
    assert rows[0]["n_eff"] == "5"


def test_replay_rejects_bad_record(tmp_path):
    bad = tmp_path / "run.json"
    bad.write_text("{}")
    assert run("--replay", bad) == 2
    assert run("--replay", tmp_path / "missing.json") == 2


# ---------------------------------------------------------------- grid

def test_grid_default_has_81_combinations(tmp_path, case_csv):
    out = tmp_path / "g"
    assert run("grid", case_csv, "--outdir", out, "--jobs", 2) == 0
    sweep = read_csv(out / "sweep.csv")
    assert len(sweep) == 81
    best = read_csv(out / "best.csv")[0]
    assert best in sweep
    key = lambda r: (-float(r["mean_roc_auc"]), -float(r["mean_g_mean"]))
    assert key(best) == min(key(r) for r in sweep)


def test_singleton_grid_equals_compare(tmp_path, case_csv):
    assert run("grid", case_csv, "--outdir", tmp_path / "g", "--k", 7, "--alpha", 0.3,
               "--beta", 0.2, "--q", 1.3) == 0
    assert run("compare", case_csv, "--methods", "none", "poqg", "--outdir", tmp_path / "c",
               "--k", 7, "--alpha", 0.3, "--beta", 0.2, "--q", 1.3) == 0
    (row,) = read_csv(tmp_path / "g" / "sweep.csv")
    summary = [r for r in read_csv(tmp_path / "c" / "summary.csv") if r["method"] == "poqg"][0]
    assert row["mean_roc_auc"] == summary["mean_roc_auc"]
    assert row["mean_g_mean"] == summary["mean_g_mean"]


def test_grid_empty_axis(tmp_path, case_csv):
    assert run("grid", case_csv, "--outdir", tmp_path / "g", "--k") == 2


def test_best_row_tie_breaks():
    rows = [
        {"k": 7, "alpha": 0.3, "beta": 0.1, "q": 1.5, "mean_roc_auc": 0.9, "mean_g_mean": 0.8},
        {"k": 5, "alpha": 0.5, "beta": 0.1, "q": 1.5, "mean_roc_auc": 0.9, "mean_g_mean": 0.8},
        {"k": 5, "alpha": 0.3, "beta": 0.1, "q": 1.5, "mean_roc_auc": 0.9, "mean_g_mean": 0.7},
        {"k": 10, "alpha": 0.3, "beta": 0.1, "q": 1.5, "mean_roc_auc": float("nan"), "mean_g_mean": 1.0},
    ]
    assert cli.best_row(rows) is rows[1]


# ---------------------------------------------------------------- demo and hull

def test_demo_outputs_and_hull(tmp_path):
    out = tmp_path / "demo"
    assert run("demo", out, "--seed", 0) == 0
    for method in cli.ALL_METHODS:
        assert len(read_csv(out / f"synthetic_{method}.csv")) == 179
        scatter = read_csv(out / f"scatter_{method}.csv")
        assert sum(r["kind"] == "synthetic" for r in scatter) == 179
    assert run("check-hull", out / "synthetic_poqg.csv", out / "case_study.csv") == 0
    assert run("demo", tmp_path / "again", "--seed", 0) == 0
    assert snapshot(out) == snapshot(tmp_path / "again")


def test_check_hull_flags_outside_points(tmp_path, case_csv):
    p = tmp_path / "pts.csv"
    p.write_text("x0,x1\n100.0,100.0\n")
    assert run("check-hull", p, case_csv) == 1


def test_points_in_hull_1d_and_square():
    square = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    inside = cli.points_in_hull(square, np.array([[0.5, 0.5], [1.0, 1.0], [1.1, 0.5]]))
    assert inside.tolist() == [True, True, False]
    assert cli.points_in_hull(np.array([[0.0], [2.0]]), np.array([[1.0], [3.0]])).tolist() == [True, False]


def test_points_in_hull_flat_reference():
    # triangle in the plane z = 1: inside iff z == 1, x >= 0, y >= 0, x + y <= 1
    tri = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 1]], dtype=float)
    pts = np.array([[0.2, 0.2, 1.0], [0.6, 0.6, 1.0], [0.2, 0.2, 1.001], [0.0, 0.5, 1.0]])
    assert cli.points_in_hull(tri, pts).tolist() == [True, False, False, True]
    seg = np.array([[0, 0, 0], [2, 2, 2], [1, 1, 1]], dtype=float)
    pts = np.array([[0.5, 0.5, 0.5], [3.0, 3.0, 3.0], [1.0, 1.0, 1.5]])
    assert cli.points_in_hull(seg, pts).tolist() == [True, False, False]
    single = np.array([[1.0, 2.0], [1.0, 2.0]])
    assert cli.points_in_hull(single, np.array([[1.0, 2.0], [1.0, 2.1]])).tolist() == [True, False]


def test_check_hull_on_fixture_with_constant_minority_column(tmp_path, capsys):
    src = str(KEEL_DIR / "ecoli4.dat")
    assert cli.main(["resample", src, str(tmp_path / "r"), "--method", "poqg"]) == 0
    assert cli.main(["check-hull", str(tmp_path / "r" / "resampled.csv"), src]) == 0
