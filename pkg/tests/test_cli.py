import csv
import json
import math
import subprocess
import sys

import pytest

from uckl.cli import DEFAULTS, SCHEMA_VERSION, run


def run_json(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 and out.out.strip() else None), out.err


def strip_time(report):
    report = dict(report)
    report.pop("wallTimeMs")
    return report


def test_defaults_table():
    assert DEFAULTS["seed"] == 42
    assert DEFAULTS["grid"] == 16
    assert DEFAULTS["tol"] == 1e-6
    assert DEFAULTS["max_iter"] == 10000


def test_kernel_eval_newtonian(capsys):
    assert run(["kernel", "eval", "--d", "3", "--z-re", "2", "--N", "0",
                "--x", "0,0,0", "--y", "1,0,0"]) == 0
    text = capsys.readouterr().out.strip()
    assert float(text) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    assert len(text.replace("0.0", "", 1).rstrip("0")) <= 16


def test_kernel_eval_complex_prints_two_parts(capsys):
    assert run(["kernel", "eval", "--z-re", "2", "--z-im", "1", "--N", "2", "--w", "2",
                "--x", "0.1,0,0.2", "--y", "1,0,0"]) == 0
    parts = capsys.readouterr().out.split()
    assert len(parts) == 2


def test_kernel_eval_report(tmp_path, capsys):
    out = tmp_path / "k.json"
    assert run(["kernel", "eval", "--z-re", "2", "--N", "1", "--x", "0.1,0,0", "--y", "1,0,0",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["estimate"]["value"] == pytest.approx(8.8419e-3, rel=1e-4)


def test_tau_example(capsys):
    code, data, _ = run_json(["tau", "--potential", "hardy:beta=0.5", "--d", "3",
                              "--center", "0,0,0", "--rho", "0.25", "--grid", "16"], capsys)
    assert code == 0
    assert data["estimate"]["value"] <= 0.55
    assert data["schemaVersion"] == SCHEMA_VERSION == 1
    assert set(data) >= {"command", "params", "estimate", "grid", "wallTimeMs", "seed"}
    assert set(data["estimate"]) >= {"value", "residual", "iterations"}
    assert set(data["grid"]) == {"n", "h", "points"}
    params = data["params"]
    for key in ("potential", "d", "center", "rho", "grid", "tol", "max_iter", "seed",
                "point_cap", "variant", "out"):
        assert key in params
    assert data["estimate"]["residual"] <= params["tol"]


def test_tau_identical_runs(capsys):
    argv = ["tau", "--potential", "stein:C=1,b=2,delta=0.5", "--center", "1,0,0",
            "--rho", "0.2", "--grid", "10"]
    _, a, _ = run_json(argv, capsys)
    _, b, _ = run_json(argv, capsys)
    assert strip_time(a) == strip_time(b)


def test_tau_dump_matrix(tmp_path, capsys):
    path = tmp_path / "m.csv"
    code, _, _ = run_json(["tau", "--potential", "const:c=1", "--center", "0,0,0", "--rho",
                           "0.5", "--grid", "4", "--dump-matrix", str(path)], capsys)
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["row", "col", "re", "im"] and len(rows) > 1


def test_certify_with_csv(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    code, data, _ = run_json(["certify", "--class", "kato", "--potential", "hardy:beta=1",
                              "--center-box", "0,0,0,0.1", "--rho0", "0.25", "--levels", "2",
                              "--grid", "8", "--csv", str(path)], capsys)
    assert code == 0
    assert data["scan"]["class"] == "kato"
    assert len(data["scan"]["values"][0]) == 2
    assert len(list(csv.reader(path.open()))) == 2


def test_lemma_binom(capsys):
    code, data, _ = run_json(["lemma", "--which", "binom", "--gamma-max", "10", "--kmax", "200"],
                             capsys)
    assert code == 0
    report = data["report"]
    assert report["lemmaId"] == "Binom"
    # the stated constant fails on this grid (see the decisions ledger)
    assert report["pass"] is False
    assert report["fittedGrowth"]["smallestValidC"] < math.pi**2 / 16


def test_lemma_identity_and_out(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["lemma", "--which", "identity", "--grid", "16", "--n-list", "0-3",
                "--out", str(out)]) == 0
    report = json.loads(out.read_text())["report"]
    assert report["lemmaId"] == "Identity"
    assert set(report["fittedGrowth"]["maxRelErrorByN"]) == {"0", "1", "2", "3"}


def test_report_merge(tmp_path, capsys):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert run(["lemma", "--which", "1", "--nmax", "6", "--out", str(a)]) == 0
    assert run(["lemma", "--which", "1", "--nmax", "4", "--out", str(b)]) == 0
    assert run(["lemma", "--which", "binom", "--gamma-max", "1", "--kmax", "20",
                "--out", str(c)]) == 0
    code, data, _ = run_json(["report-merge", str(a), str(b)], capsys)
    assert code == 0
    assert data["count"] == 2 and data["allPass"] is True
    code, data, _ = run_json(["report-merge", str(a), str(b), str(c)], capsys)
    assert code == 0
    assert data["count"] == 3 and data["allPass"] is False


@pytest.mark.parametrize("argv", [
    ["tau", "--potential", "hardy:beta=0.5", "--center", "0,0,0", "--rho", "-1"],
    ["tau", "--potential", "hardy:beta=-1", "--center", "0,0,0", "--rho", "1"],
    ["tau", "--potential", "hardy:beta=1", "--center", "0,0", "--rho", "1"],
    ["tau", "--potential", "hardy:beta=1", "--center", "0,0,0", "--rho", "1", "--bogus"],
    ["tau", "--potential", "hardy:beta=1", "--center", "0,0,0", "--rho", "1", "--grid", "1"],
    ["tau", "--potential", "hardy:beta=1", "--center", "0,0,0", "--rho", "nan"],
    ["kernel", "eval", "--z-re", "3", "--x", "0,0,0", "--y", "1,0,0"],
    ["kernel", "eval", "--z-re", "2", "--x", "1,0,0", "--y", "1,0,0"],
    ["kernel", "eval", "--z-re", "2", "--N", "1", "--delta", "0.25", "--w", "1",
     "--x", "0.1,0,0", "--y", "1,0,0"],
    ["report-merge", "/nonexistent.json"],
    ["frobnicate"],
])
def test_invalid_parameters_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_nonconvergence_exit_3(capsys):
    code = run(["tau", "--potential", "hardy:beta=1", "--center", "0,0,0", "--rho", "1",
                "--grid", "8", "--max-iter", "1"])
    assert code == 3
    assert "best estimate" in capsys.readouterr().err


def test_capacity_exit_4(capsys):
    code = run(["tau", "--potential", "hardy:beta=1", "--center", "0,0,0", "--rho", "1",
                "--grid", "40", "--point-cap", "1000"])
    assert code == 4
    assert "capacity" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uckl", "kernel", "eval", "--z-re", "2",
                           "--x", "0,0,0", "--y", "2,0,0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(1 / (8 * math.pi), rel=1e-14)
