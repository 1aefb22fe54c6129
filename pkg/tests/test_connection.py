import math

import numpy as np
import pytest

from tetradlab import connection as cn
from tetradlab.builtins import get_builtin
from tetradlab.geometry import sample_points
from tetradlab.operators import Operators
from tetradlab.symexpr import Evaluator, const

from conftest import BUILTIN_NAMES, evaluator, manifold, worst


def _numeric_christoffel(man, x, h=1e-5):
    """Gamma^r_{mn} from central differences of the evaluated metric."""
    n = man.dim

    def g_at(p):
        ev = Evaluator(p[None, :])
        return np.array([[ev(man.metric.g[i][j])[0] for j in range(n)] for i in range(n)])

    dg = np.zeros((n, n, n))  # dg[k][i][j] = d_k g_ij
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        dg[k] = (g_at(x + step) - g_at(x - step)) / (2 * h)
    gi = np.linalg.inv(g_at(x))
    low = 0.5 * (np.einsum("mrn->rmn", dg) + np.einsum("nrm->rmn", dg) - dg)
    return np.einsum("rs,smn->rmn", gi, low)


@pytest.mark.parametrize("name", ["schwarzschild", "flrw-dust", "s2"])
def test_christoffel_against_finite_differences(name):
    man = manifold(name)
    gam = cn.levi_civita(man).gamma
    n = man.dim
    for x in sample_points(man.chart, 3, 4):
        ev = Evaluator(x[None, :])
        exact = np.array([[[ev(gam[r][m][v])[0] for v in range(n)] for m in range(n)]
                          for r in range(n)])
        assert np.max(np.abs(exact - _numeric_christoffel(man, x))) <= 1e-7


def test_schwarzschild_gamma_t_tr_at_r_10():
    gam = cn.levi_civita(manifold("schwarzschild")).gamma
    x = np.array([0.0, 10.0, 1.0, 1.0])
    assert Evaluator(x[None, :])(gam[0][0][1])[0] == pytest.approx(0.0125, abs=1e-15)
    assert _numeric_christoffel(manifold("schwarzschild"), x)[0, 0, 1] == \
        pytest.approx(0.0125, abs=1e-9)


def test_s2_scalar_curvature_is_two_over_r_squared():
    man = get_builtin("s2", R=3.0)
    cur = cn.curvature(cn.levi_civita(man), man.metric)
    v = Evaluator(sample_points(man.chart, 5, 0))(cur.scalar)
    assert np.allclose(v, 2.0 / 9.0)


def test_schwarzschild_kretschmann_scalar():
    man = manifold("schwarzschild")
    fr = cn.curvature(cn.levi_civita(man), man.metric).frame_riemann
    eta = man.coframe.eta
    pts = sample_points(man.chart, 6, 1)
    ev = Evaluator(pts)
    K = sum(eta[a] * eta[b] * eta[c] * eta[d] * ev(fr[a][b][c][d]) ** 2
            for a in range(4) for b in range(4) for c in range(4) for d in range(4))
    assert np.allclose(K, 48.0 / pts[:, 1] ** 6, rtol=1e-10)


def test_levi_civita_properties(builtin_name):
    man = manifold(builtin_name)
    lc = cn.levi_civita(man)
    ev = evaluator(builtin_name)
    assert worst(ev, cn.nabla_q(man.coframe, lc)) <= 1e-9
    assert worst(ev, cn.torsion_from_commutator(lc)) <= 1e-12
    assert worst(ev, cn.metric_compatibility_residuals(lc, man.metric)) <= 1e-9
    assert worst(ev, cn.omega_antisymmetry_residuals(lc)) <= 1e-9
    assert worst(ev, cn.first_bianchi_residuals(cn.riemann_tensor(lc.gamma))) <= 1e-7


def test_s2_frame_connection():
    man = manifold("s2")
    w = cn.levi_civita(man).frame_omega()
    pts = sample_points(man.chart, 6, 0)
    ev = Evaluator(pts)
    cot = np.cos(pts[:, 0]) / np.sin(pts[:, 0])
    # nabla_{e_2} e_2 = -cot e_1 and nabla_{e_2} e_1 = cot e_2
    assert np.allclose(ev(w[0][1][1]), -cot)
    assert np.allclose(ev(w[1][1][0]), cot)
    assert np.allclose(ev(w[0][0][0]), 0.0) and np.allclose(ev(w[1][0][1]), 0.0)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_columbus_connection(name):
    man = manifold(name)
    col = cn.columbus_connection(man.coframe)
    ev = evaluator(name)
    assert worst(ev, cn.riemann_tensor(col.gamma)) <= 1e-9
    assert worst(ev, cn.nabla_minus_q(man.coframe, col)) <= 1e-12
    assert worst(ev, cn.nabla_q(man.coframe, col)) <= 1e-12
    assert worst(ev, cn.metric_compatibility_residuals(col, man.metric)) <= 1e-9


def test_columbus_torsion_on_s2():
    man = manifold("s2")
    T = cn.torsion_from_commutator(cn.columbus_connection(man.coframe), "orthonormal")
    pts = sample_points(man.chart, 8, 0)
    v = Evaluator(pts)(T[1][0][1])
    assert np.allclose(np.abs(v), np.abs(np.cos(pts[:, 0]) / np.sin(pts[:, 0])))


def test_custom_connection_torsion():
    man = manifold("s2")
    lc = cn.levi_civita(man)
    gam = [[list(r) for r in blk] for blk in lc.gamma]
    gam[0][0][1] = gam[0][0][1] + 1.0  # adds T^1_{12} = 1
    conn = cn.build_connection(man, "custom", gam)
    ev = evaluator("s2")
    T = cn.torsion_from_commutator(conn)
    assert worst(ev, T[0][0][1] - 1.0) <= 1e-12
    assert worst(ev, [T[0][1][0] + 1.0]) <= 1e-12
    via_q = cn.torsion_from_tetrad_components(man.coframe, conn)
    assert worst(ev, [via_q[a][m][v] - cn.torsion_to_tetrad_slots(man.coframe, T)[a][m][v]
                      for a in range(2) for m in range(2) for v in range(2)]) <= 1e-12
    assert worst(ev, cn.nabla_q(man.coframe, conn)) <= 1e-12


def test_wrong_minus_torsion_is_nonzero_on_s2():
    man = manifold("s2")
    Tw = cn.torsion_from_tetrad_components(man.coframe, cn.levi_civita(man), wrong_minus=True)
    v = Evaluator(np.array([[math.pi / 4, 1.0]]))(Tw[1][0][1])
    assert v[0] == pytest.approx(math.cos(math.pi / 4))


def test_connection_flavor_errors():
    man = manifold("s2")
    with pytest.raises(ValueError, match="unknown connection flavor"):
        cn.build_connection(man, "affine")
    with pytest.raises(ValueError, match="gamma"):
        cn.build_connection(man, "custom")
    with pytest.raises(cn.FlavorError):
        Operators(cn.columbus_connection(man.coframe), man.metric)


def test_mismatched_connection_breaks_freshman_identity():
    man = manifold("s2")
    lc = cn.levi_civita(man)
    col = cn.columbus_connection(man.coframe)
    ev = Evaluator(np.array([[math.pi / 4, math.pi]]))
    assert worst(ev, cn.nabla_q(man.coframe, cn.mismatched(lc, col.omega))) > 0.1
