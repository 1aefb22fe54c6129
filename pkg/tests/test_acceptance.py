"""Acceptance criteria. Each test prints one ``[ACCEPT n] PASS|FAIL ...`` line."""
import functools
import math
import subprocess
import sys

import numpy as np
import pytest

from tetradlab import connection as cn
from tetradlab.clifford import random_field
from tetradlab.geometry import sample_points
from tetradlab.manifest import manifest_from_text
from tetradlab.suites import algebra_residuals, oracle_residual, per_point, run_suites
from tetradlab.symexpr import Evaluator

from conftest import BUILTIN_NAMES, manifold, ops_for

FOUR_D = ("minkowski", "schwarzschild", "flrw-dust")


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[ACCEPT {n:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@functools.lru_cache(maxsize=None)
def suite_rows(name):
    m = manifest_from_text(f"manifold = builtin:{name}\n")
    return run_suites(m, points=16, seed=0).rows


def rows(name, suite, prefix=""):
    return [r for r in suite_rows(name) if r.suite == suite and r.check.startswith(prefix)]


def summarize(selected):
    bad = [f"{r.manifold}:{r.check}={r.max_residual:.2e}" for r in selected if not r.passed]
    return not bad and bool(selected), bad


@functools.lru_cache(maxsize=None)
def s2_box_points():
    """16 seeded points in (0.1, pi-0.1) x (0.1, 2pi-0.1)."""
    rng = np.random.default_rng(0)
    return rng.uniform([0.1, 0.1], [math.pi - 0.1, 2 * math.pi - 0.1], size=(16, 2))


def test_criterion_01_s2_counterexample(capsys):
    man = manifold("s2")
    cf = man.coframe
    lc = cn.levi_civita(man)
    pts = s2_box_points()
    ev = Evaluator(pts)
    th = pts[:, 0]
    c, s, cot = np.cos(th), np.sin(th), np.cos(th) / np.sin(th)
    G = lc.gamma
    V = cn.nabla_minus_q(cf, lc)
    P = cn.nabla_plus_q(cf, lc)
    Tw = cn.torsion_from_tetrad_components(cf, lc, wrong_minus=True)
    pairs = {
        "Gamma^1_22": (G[0][1][1], -c * s),
        "Gamma^2_12": (G[1][0][1], cot),
        "Gamma^2_21": (G[1][1][0], cot),
        "nabla-_2 q^2_1": (V[1][1][0], -c),
        "nabla-_2 q^2_2": (V[1][1][1], 0 * th),
        "nabla-_2 q^1_2": (V[0][1][1], c * s),
        "nabla+_1 q_1^2": (P[0][0][1], 0 * th),
        "nabla+_1 q_2^2": (P[1][0][1], c),
        "nabla+_2 q_2^1": (P[1][1][0], c),
        "nabla+_2 q_1^2": (P[0][1][1], -c * s),
        "wrong-mode T^2_12": (Tw[1][0][1], c),
    }
    worst = {k: float(np.max(np.abs(ev(e) - ref))) for k, (e, ref) in pairs.items()}
    worst["levi-civita torsion"] = float(np.max(per_point(
        ev, cn.torsion_from_tetrad_components(cf, lc))))
    top = max(worst, key=worst.get)
    report(capsys, 1, worst[top] <= 1e-9, f"S2 closed forms, worst {top} = {worst[top]:.2e} (tol 1e-9)")


def test_criterion_02_freshman_identity(capsys):
    worst = {}
    for name in BUILTIN_NAMES:
        man = manifold(name)
        ev = Evaluator(sample_points(man.chart, 32, 0))
        worst[name] = float(np.max(per_point(ev, cn.nabla_q(man.coframe, cn.levi_civita(man)))))
    ok = all(v <= 1e-9 for v in worst.values())
    report(capsys, 2, ok, "nabla Q = 0 at 32 points: "
           + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_03_columbus_connection(capsys):
    man = manifold("s2")
    cf = man.coframe
    col = cn.columbus_connection(cf)
    pts = s2_box_points()
    ev = Evaluator(pts)
    riem = float(np.max(per_point(ev, cn.riemann_tensor(col.gamma))))
    T = cn.torsion_from_commutator(col, "orthonormal")
    cot = np.cos(pts[:, 0]) / np.sin(pts[:, 0])
    tors = float(np.max(np.abs(np.abs(ev(T[1][0][1])) - np.abs(cot))))
    nm = float(np.max(per_point(ev, cn.nabla_minus_q(cf, col))))
    ok = max(riem, tors, nm) <= 1e-9
    report(capsys, 3, ok, f"Columbus on S2: Riemann {riem:.1e}, |T^2_12|-cot {tors:.1e}, "
           f"nabla- q {nm:.1e}")


def test_criterion_04_clifford_algebra(capsys):
    worst_id, worst_oracle = 0.0, 0.0
    for eta in ((1, -1, -1, -1), (1, 1)):
        res = algebra_residuals(eta, np.random.default_rng([4, len(eta)]), pairs=200)
        worst_id = max(worst_id, max(res.values()))
        worst_oracle = max(worst_oracle, oracle_residual(eta))
    ok = worst_id <= 1e-10 and worst_oracle <= 1e-12
    report(capsys, 4, ok, f"200 pairs per signature: identities {worst_id:.1e}, "
           f"blade-table oracle {worst_oracle:.1e}")


def test_criterion_05_dirac_decomposition(capsys):
    worst = 0.0
    for name in ("minkowski", "s2", "schwarzschild"):
        ops = ops_for(name)
        cf = manifold(name).coframe
        rng = np.random.default_rng([5, cf.dim])
        ev = Evaluator(sample_points(manifold(name).chart, 8, 0))
        calc = ops.calc
        for k in range(cf.dim + 1):
            A = random_field(cf, rng, {k})
            d, dl = calc.d(A), calc.delta(A)
            split = calc.dirac(A) - (d - dl)
            sq = ops.dirac_squared(A)
            hodge = (calc.delta(d) + calc.d(dl)).scale(-1.0)
            box, ric = ops.box_and_ricci(A)
            worst = max(worst, float(np.max(per_point(ev, [split, sq - hodge, sq - box - ric]))))
    report(capsys, 5, worst <= 1e-7, f"d - delta split and squared forms: {worst:.1e} (tol 1e-7)")


def test_criterion_06_ricci_einstein_operators(capsys):
    sel = []
    for name in BUILTIN_NAMES:
        r = rows(name, "suite.operators")
        sel += [x for x in r if x.check.startswith(("ricci.", "einstein.", "weitzenboeck."))]
    names = {(x.manifold, x.check) for x in sel}
    needed = {("s2", "einstein.vanishes"), ("schwarzschild", "einstein.vanishes")}
    ok, bad = summarize(sel)
    ok = ok and needed <= names
    report(capsys, 6, ok, f"{len(sel)} operator rows at 1e-7" + (f", failing {bad}" if bad else ""))


def test_criterion_07_tetrad_field_equation(capsys):
    sel = []
    for name in FOUR_D:
        sel += rows(name, "suite.fieldeq")
    harmonic = [r for r in sel if r.check == "coordinate.harmonic-gauge"]
    ok, bad = summarize(sel)
    ok = ok and len(harmonic) == 1 and harmonic[0].manifold == "minkowski" \
        and harmonic[0].max_residual == 0.0
    report(capsys, 7, ok, f"{len(sel)} field-equation rows, harmonic gauge exact on Minkowski"
           + (f", failing {bad}" if bad else ""))


def test_criterion_08_evans_failure(capsys):
    flat = rows("minkowski", "suite.evans-demo")
    s2 = rows("s2", "suite.evans-demo")
    sch = rows("schwarzschild", "suite.evans-demo")
    ok = (all(r.max_residual == 0.0 and r.passed for r in flat)
          and all(r.expect_above and r.passed and r.max_residual > 0.1 for r in s2)
          and all(r.expect_above and r.passed and r.max_residual > 0 for r in sch)
          and len(flat) == len(s2) == len(sch) == 2)
    detail = ", ".join(f"{r.manifold}:{r.check.split()[0]}={r.max_residual:.2e}"
                       for r in flat + s2 + sch)
    report(capsys, 8, ok, detail)


def test_criterion_09_maxwell(capsys):
    sel = []
    for name in BUILTIN_NAMES:
        sel += rows(name, "suite.maxwell")
    vac = [r for r in sel if r.check == "potential.vacuum-reduction"]
    ok, bad = summarize(sel)
    ok = ok and "schwarzschild" in {r.manifold for r in vac}
    report(capsys, 9, ok, f"{len(sel)} Maxwell rows incl. Schwarzschild vacuum reduction"
           + (f", failing {bad}" if bad else ""))


def test_criterion_10_lagrangian(capsys):
    sel = []
    for name in FOUR_D:
        sel += rows(name, "suite.lagrangian")
    checks = {r.check for r in sel}
    needed = {"omega.from-dtheta", "euler-lagrange.algebraic", "euler-lagrange.superpotential"}
    ok, bad = summarize(sel)
    ok = ok and needed <= checks
    omega = max(r.max_residual for r in sel if r.check == "omega.from-dtheta")
    report(capsys, 10, ok, f"{len(sel)} Lagrangian rows, omega reconstruction {omega:.1e}"
           + (f", failing {bad}" if bad else ""))


@pytest.mark.parametrize("name", ["s2", "schwarzschild"])
def test_criterion_11_determinism(capsys, tmp_path, name):
    m = manifest_from_text(f"manifold = builtin:{name}\n")
    a = run_suites(m, points=8, seed=7).tsv()
    b = run_suites(m, points=8, seed=7).tsv()
    path = tmp_path / "m.toml"
    path.write_text(f"manifold = builtin:{name}\n")
    cmd = [sys.executable, "-m", "tetradlab.cli", "check", str(path), "--points", "8",
           "--seed", "7", "--suite", "suite.counterexample", "--suite", "suite.evans-demo"]
    out1 = subprocess.run(cmd, capture_output=True).stdout
    out2 = subprocess.run(cmd, capture_output=True).stdout
    ok = a == b and out1 == out2 and len(out1) > 0
    report(capsys, 11, ok, f"{name}: identical report bytes across two runs (API and CLI)")
