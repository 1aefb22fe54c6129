import json
import shutil
import subprocess

import pytest

from tetradlab.cli import main
from tetradlab.manifest import SUITE_NAMES


@pytest.fixture
def s2_file(tmp_path):
    p = tmp_path / "s2.manifest"
    p.write_text("manifold = builtin:s2\n")
    return str(p)


@pytest.fixture
def mink_file(tmp_path):
    p = tmp_path / "mink.manifest"
    p.write_text("manifold = builtin:minkowski\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_commands(capsys):
    code, out, _ = run(capsys, "list-suites")
    assert code == 0 and [l.split("\t")[0] for l in out.splitlines()] == list(SUITE_NAMES)
    code, out, _ = run(capsys, "list-builtins")
    assert code == 0 and "schwarzschild" in out and "flrw-dust" in out


def test_check_passes_and_prints_tsv(capsys, s2_file):
    code, out, _ = run(capsys, "check", s2_file, "--suite", "suite.counterexample",
                       "--points", "6")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].split("\t") == ["suite", "check", "manifold", "max_residual", "tol",
                                    "status", "point"]
    assert all(l.split("\t")[5] == "PASS" for l in lines[1:])
    assert any("expected-fail" in l for l in lines[1:])


def test_check_json(capsys, mink_file):
    code, out, _ = run(capsys, "check", mink_file, "--suite", "suite.evans-demo", "--json")
    data = json.loads(out)
    assert code == 0 and data["passed"] is True
    assert {r["check"] for r in data["rows"]} == {"eq2E", "eq49E"}


def test_wrong_minus_fails(capsys, s2_file):
    code, out, _ = run(capsys, "check", s2_file, "--suite", "suite.counterexample",
                       "--wrong-minus", "--points", "6")
    assert code == 1
    assert any("wrong-minus" in l and "FAIL" in l for l in out.splitlines())


def test_tiny_tolerance_scale_fails(capsys, s2_file):
    code, _, _ = run(capsys, "check", s2_file, "--suite", "suite.operators",
                     "--points", "4", "--tol-scale", "1e-12")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["check", "/nonexistent/file"],
    ["check", "MANIFEST", "--suite", "suite.bogus"],
    ["check", "MANIFEST", "--points", "0"],
    ["check", "MANIFEST", "--tol-scale", "-1"],
    ["eval", "MANIFEST", "--expr", "e(0)", "--op", "curl", "--at", "1,1"],
    ["eval", "MANIFEST", "--expr", "e(7)", "--op", "d", "--at", "1,1"],
    ["eval", "MANIFEST", "--expr", "e(0)", "--op", "d", "--at", "1"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, s2_file, argv):
    argv = [s2_file if a == "MANIFEST" else a for a in argv]
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_seed_priority(capsys, s2_file, monkeypatch):
    args = ("check", s2_file, "--suite", "suite.clifford", "--points", "4")
    monkeypatch.setenv("TETRADLAB_SEED", "5")
    _, env5, _ = run(capsys, *args)
    _, cli5, _ = run(capsys, *args, "--seed", "5")
    monkeypatch.setenv("TETRADLAB_SEED", "6")
    _, env6, _ = run(capsys, *args)
    _, cli5_again, _ = run(capsys, *args, "--seed", "5")
    assert env5 == cli5 == cli5_again
    assert env5 != env6


def test_eval_dirac_of_theta_on_sphere(capsys, s2_file):
    code, out, _ = run(capsys, "eval", s2_file, "--expr", "e(0)", "--op", "dirac",
                       "--at", "x1=pi/4, x2=1")
    assert code == 0
    assert out.splitlines() == ["1\t1"]


def test_eval_json(capsys, s2_file):
    code, out, _ = run(capsys, "eval", s2_file, "--expr", "x1*e(1)", "--op", "d",
                       "--at", "pi/2, 0", "--json")
    data = json.loads(out)
    assert code == 0 and data["e(0,1)"] == pytest.approx(1.0)


def test_eval_domain_error_exits_1(capsys, s2_file):
    code, _, err = run(capsys, "eval", s2_file, "--expr", "e(0)", "--op", "dirac",
                       "--at", "0, 1")
    assert code == 1 and "error" in err


@pytest.mark.skipif(shutil.which("tetradlab") is None, reason="console script not installed")
def test_console_script_is_deterministic(s2_file):
    cmd = ["tetradlab", "check", s2_file, "--suite", "suite.connection", "--points", "5",
           "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout
