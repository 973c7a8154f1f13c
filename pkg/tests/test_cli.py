import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hjt.cli import RunConfig, UsageError, main, parse_grid, parse_params, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# parsing helpers ----------------------------------------------------------


def test_parse_params_and_grid():
    assert parse_params("k=1, l=0.5,metric=minkowski") == {"k": 1.0, "l": 0.5, "metric": "minkowski"}
    assert parse_params(None) == {}
    with pytest.raises(UsageError):
        parse_params("k")
    labels, grid = parse_grid("q1:0.5:2:4,q2:-1:1:3")
    assert labels == ["q1", "q2"] and len(grid.points()) == 12
    with pytest.raises(UsageError):
        parse_grid("q1:0:1")
    with pytest.raises(UsageError):
        parse_grid("q1:0:1:0")


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("verify", tol=0.0)
    with pytest.raises(UsageError):
        RunConfig("integrate", dt=-1.0)
    with pytest.raises(UsageError):
        RunConfig("verify", mode="strong")


# verify -------------------------------------------------------------------


def test_verify_energy_field_standard(capsys):
    code, out, _ = run(capsys, "verify", "--system", "ho2d", "--candidate", "XE", "--params", "E1=1,E2=0.5",
                       "--mode", "standard", "--tol", "1e-8")
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "pass"
    assert set(report["channels"]) == {"oneform", "sode", "pullback_omega", "d_pullback_energy"}
    assert list(report) == sorted(report)


def test_verify_cl_field_dichotomy(capsys):
    code, out, _ = run(capsys, "verify", "--system", "ho2d", "--candidate", "XCl", "--params", "C=1,l=0",
                       "--mode", "standard")
    assert code == 1
    assert "pullback_omega" in json.loads(out)["failing_channels"]
    code, _, _ = run(capsys, "verify", "--system", "ho2d", "--candidate", "XCl", "--params", "C=1,l=0",
                     "--mode", "generalized")
    assert code == 0


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--system", "free", "--candidate", "X_kl", "--grid",
                       "q1:0.5:1:2,q2:0:1:2", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:2] == ["q1", "q2"] and rows[0][-1] == "pass"
    assert len(rows) == 5
    assert "\r" not in out


def test_verify_oneform_candidate(capsys):
    code, out, _ = run(capsys, "verify", "--system", "free", "--candidate", "alpha_q1", "--mode", "standard")
    assert code == 1
    assert "closedness" in json.loads(out)["failing_channels"]


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--system", "nosuch", "--candidate", "XE"],
        ["verify", "--system", "ho2d", "--candidate", "nosuch"],
        ["verify", "--system", "ho2d", "--candidate", "XE", "--params", "zz=1"],
        ["verify", "--system", "ho2d", "--candidate", "XE", "--grid", "q1:0:1:3"],
        ["verify", "--system", "ho2d"],
        ["verify", "--system", "ho2d", "--candidate", "XE", "--mode", "bogus"],
        ["frobnicate"],
        ["verify", "--system", "free", "--candidate", "X_kl", "--grid", "q1:0:0:1,q2:0:0:1"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_guard_abort_exits_3_with_partial_output(capsys):
    # a free particle aimed at the origin hits the monopole's excluded point at t = 1
    code, out, _ = run(capsys, "integrate", "--system", "monopole", "--params", "n=0", "--x0", "1,0,0,-1,0,0",
                       "--steps", "1500", "--format", "csv")
    assert code == 3
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[-1][:2] == ["status", "aborted at step 1000"]


# candidate files ----------------------------------------------------------


def test_candidate_file_matches_registry(capsys, tmp_path):
    path = write(tmp_path, "shear.txt", "# shear family\nparam k\nparam l = 0\nw1 = k\nw2 = (k*q2 - l)/q1\n")
    code, out, _ = run(capsys, "verify", "--system", "free", "--candidate", path, "--params", "k=2,l=1",
                       "--grid", "q1:0.5:2:4,q2:-1:1:4")
    assert code == 0
    file_report = json.loads(out)
    code, out, _ = run(capsys, "verify", "--system", "free", "--candidate", "X_kl", "--params", "k=2,l=1",
                       "--grid", "q1:0.5:2:4,q2:-1:1:4")
    reg_report = json.loads(out)
    assert file_report["channels"] == reg_report["channels"]
    assert file_report["params"] == {"k": 2.0, "l": 1.0}


def test_candidate_file_oneform(capsys, tmp_path):
    path = write(tmp_path, "alpha.txt", "a1 = 0\na2 = 1/q1\n")
    code, _, _ = run(capsys, "verify", "--system", "free", "--candidate", path)
    assert code == 0


def test_candidate_file_syntax_error_position(capsys, tmp_path):
    path = write(tmp_path, "bad.txt", "w1 = 1\nw2 = q1 +\n")
    code, _, err = run(capsys, "verify", "--system", "free", "--candidate", path)
    assert code == 2
    assert f"{path}:2:10" in err


def test_candidate_file_unknown_identifier(capsys, tmp_path):
    path = write(tmp_path, "bad.txt", "w1 = 1\nw2 = zeta*q1\n")
    code, _, err = run(capsys, "verify", "--system", "free", "--candidate", path)
    assert code == 2
    assert "zeta" in err


@pytest.mark.parametrize(
    "text",
    ["w1 = 1\n", "w1 = 1\na2 = 2\n", "w1 = 1\nw2 = 2\nbanana\n", "param k\nw1 = k\nw2 = 1\n", "param 1k\nw1 = 1\nw2 = 1\n"],
)
def test_candidate_file_structure_errors(capsys, tmp_path, text):
    path = write(tmp_path, "bad.txt", text)
    code, _, _ = run(capsys, "verify", "--system", "free", "--candidate", path)
    assert code == 2


# config -------------------------------------------------------------------


def test_config_file_and_override(capsys, tmp_path):
    cfg = write(tmp_path, "run.ini", "[run]\nsystem = ho2d\ntol = 1e-8\n\n[verify]\ncandidate = XCl\nmode = standard\n")
    code, _, _ = run(capsys, "verify", "--config", cfg)
    assert code == 1
    code, _, _ = run(capsys, "verify", "--config", cfg, "--mode", "generalized")
    assert code == 0


def test_config_errors(capsys, tmp_path):
    cfg = write(tmp_path, "run.ini", "[run]\ncolour = blue\n")
    assert run(capsys, "verify", "--config", cfg)[0] == 2
    assert run(capsys, "verify", "--config", str(tmp_path / "missing.ini"))[0] == 2
    with pytest.raises(UsageError):
        read_config(str(tmp_path / "missing.ini"), "verify")


# integrate ----------------------------------------------------------------


def test_integrate_oscillator_endpoint(capsys):
    code, out, _ = run(capsys, "integrate", "--system", "ho2d", "--x0", "1,0,0,1", "--dt", "1e-3",
                       "--steps", "1000", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:5] == ["t", "q1", "q2", "v1", "v2"]
    last = [r for r in rows if r and r[0] not in ("max_drift", "status")][-1]
    state = [float(c) for c in last[1:5]]
    expected = [math.cos(1), math.sin(1), -math.sin(1), math.cos(1)]
    assert max(abs(a - b) for a, b in zip(state, expected)) <= 1e-9
    assert any(r[0] == "max_drift" for r in rows)


def test_integrate_projection_mode(capsys):
    code, out, _ = run(capsys, "integrate", "--system", "ho2d", "--candidate", "XE", "--x0", "0.2,0.1",
                       "--steps", "200", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert "distance" in rows[0]
    sup = [r for r in rows if r[0] == "sup_distance"][0]
    assert float(sup[-1]) <= 1e-5


def test_integrate_outside_domain_exits_3(capsys):
    code, _, err = run(capsys, "integrate", "--system", "relativistic", "--x0", "0,0,0,0", "--steps", "5")
    assert code == 3
    assert "GuardViolation" in err


# brackets and scan --------------------------------------------------------


def test_brackets(capsys):
    code, out, _ = run(capsys, "brackets", "--system", "ho2d", "--integrals", "f2,f3")
    assert code == 0
    assert max(max(abs(v) for v in row) for row in json.loads(out)["table"]) <= 1e-8
    code, out, _ = run(capsys, "brackets", "--system", "ho2d", "--integrals", "f1,f4", "--require-involution")
    assert code == 1
    assert json.loads(out)["table"][0][1] > 0
    code, out, _ = run(capsys, "brackets", "--system", "ho2d", "--integrals", "f2")
    assert json.loads(out)["table"] == [[0.0]]


def test_scan_energy_family(capsys):
    code, out, _ = run(capsys, "scan", "--system", "ho2d", "--candidate", "X_f23", "--grid",
                       "E1:0.5:2:2,E2:0.5:2:2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    for r in rows:
        assert r["generalized"] == "pass" and r["standard"] == "pass"
        assert float(r["transversality"]) > 0


def test_scan_free_particle(capsys):
    code, out, _ = run(capsys, "scan", "--system", "free", "--candidate", "X_v", "--grid", "c1:0.5:1:2,c2:-1:1:2",
                       "--format", "csv")
    assert code == 0
    for r in csv.DictReader(io.StringIO(out)):
        assert r["standard"] == "pass"
        assert float(r["transversality"]) == pytest.approx(1.0, abs=1e-6)


def test_list_systems(capsys):
    code, out, _ = run(capsys, "list-systems")
    assert code == 0
    assert "monopole" in out and "ho2d" in out


# determinism --------------------------------------------------------------


def test_reports_are_deterministic(capsys, monkeypatch):
    argv = ["verify", "--system", "ho2d", "--candidate", "XE", "--mode", "standard", "--format", "csv"]
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("HJT_NUM_THREADS", threads)
        outs.append(run(capsys, *argv)[1])
    assert outs[0] == outs[1] == outs[2]


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "hjt.cli", "verify", "--system", "free", "--candidate", "X_const",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["verdict"] == "pass"
