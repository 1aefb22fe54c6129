import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tetradlab.clifford import Algebra, blade_indices, random_field
from tetradlab.fieldeq import (DimensionError, constraint_l4, coordinate_coframe_field_eq,
                               einstein_one_form_residual, einstein_tensor_from_geometry,
                               energy_momentum, euler_lagrange_forms, evans_residuals,
                               lagrangian_identities, maxwell, maxwell_potential_residual,
                               q_wave_eq_gr, tetrad_field_eq_residual, variation_checks)
from tetradlab.geometry import sample_points
from tetradlab.symexpr import Evaluator

from conftest import evaluator, manifold, ops_for, worst

FOUR_D = ("minkowski", "schwarzschild", "flrw-dust")


@pytest.mark.parametrize("name", FOUR_D)
def test_field_equations_with_geometric_source(name):
    ops = ops_for(name)
    ev = evaluator(name)
    T = einstein_tensor_from_geometry(ops)
    assert worst(ev, einstein_one_form_residual(ops, T)) <= 1e-6
    assert worst(ev, tetrad_field_eq_residual(ops, T)) <= 1e-6
    assert worst(ev, coordinate_coframe_field_eq(ops, T).einstein) <= 1e-6
    assert worst(ev, q_wave_eq_gr(ops, T)) <= 1e-6
    assert worst(ev, constraint_l4(ops, T)) <= 1e-6


def test_schwarzschild_is_vacuum():
    T = einstein_tensor_from_geometry(ops_for("schwarzschild"))
    assert worst(evaluator("schwarzschild"), [list(r) for r in T.components]) <= 1e-9


def test_flrw_dust_density_and_zero_pressure():
    T = einstein_tensor_from_geometry(ops_for("flrw-dust"))
    pts = sample_points(manifold("flrw-dust").chart, 8, 1)
    ev = Evaluator(pts)
    t = pts[:, 0]
    # 3 H^2 with H = 2 / (3 t); operator sign is minus the usual Einstein tensor
    assert np.max(np.abs(ev(T.components[0][0]) + 4.0 / (3.0 * t ** 2))) <= 1e-12
    assert worst(ev, [T.components[a][b] for a in range(4) for b in range(4)
                      if (a, b) != (0, 0)]) <= 1e-12


def test_wrong_source_is_detected():
    ops = ops_for("flrw-dust")
    zero = energy_momentum(ops.cf, [[0.0] * 4 for _ in range(4)])
    assert worst(evaluator("flrw-dust"), einstein_one_form_residual(ops, zero)) > 1e-3


def test_harmonic_gauge_on_minkowski_is_exact():
    ops = ops_for("minkowski")
    T = einstein_tensor_from_geometry(ops)
    fe = coordinate_coframe_field_eq(ops, T)
    ev = evaluator("minkowski")
    assert worst(ev, fe.harmonic) == 0.0
    assert worst(ev, fe.gauge) == 0.0


def test_evans_equations():
    assert worst(evaluator("minkowski"), evans_residuals(ops_for("minkowski")).eq49E) == 0.0
    at = Evaluator(np.array([[np.pi / 4, np.pi]]))
    assert worst(at, evans_residuals(ops_for("s2")).eq49E) > 0.1


@pytest.mark.parametrize("name", ("s2", "schwarzschild"))
def test_maxwell_split_and_potential(name):
    ops = ops_for(name)
    rng = np.random.default_rng(11)
    F = random_field(ops.cf, rng, {2})
    A = random_field(ops.cf, rng, {1})
    ev = evaluator(name)
    assert worst(ev, maxwell(ops, F).split_residual) <= 1e-8
    assert worst(ev, maxwell_potential_residual(ops, A).components) <= 1e-7


@pytest.mark.parametrize("name", FOUR_D)
def test_lagrangian_identities(name):
    ev = evaluator(name)
    rep = lagrangian_identities(ops_for(name))
    assert worst(ev, rep.l_eh - rep.l_eh_forms) <= 1e-6
    assert worst(ev, rep.eh_split_residual) <= 1e-6
    assert worst(ev, rep.scalar_chain) <= 1e-6
    assert worst(ev, rep.structure) <= 1e-6
    assert worst(ev, rep.expansion) <= 1e-6
    assert worst(ev, rep.omega_residuals) <= 1e-8
    assert worst(ev, rep.dual_chain) <= 1e-6
    assert worst(ev, rep.quadratic_chain) <= 1e-6
    assert worst(ev, rep.einstein_dual) <= 1e-6


@pytest.mark.parametrize("name", ("schwarzschild", "flrw-dust"))
def test_dual_chain_needs_the_connection_term(name):
    rep = lagrangian_identities(ops_for(name))
    assert worst(evaluator(name), rep.dual_chain_dropped) > 1e-3


@pytest.mark.parametrize("name", FOUR_D)
def test_euler_lagrange_both_routes(name):
    ev = evaluator(name)
    el = euler_lagrange_forms(ops_for(name))
    assert worst(ev, el.algebraic_residuals) <= 1e-6
    assert worst(ev, el.superpotential_residuals) <= 1e-6


def test_lagrangian_needs_four_dimensions():
    with pytest.raises(DimensionError):
        lagrangian_identities(ops_for("s2"))
    with pytest.raises(DimensionError):
        euler_lagrange_forms(ops_for("s2"))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(1, -1, -1, -1), (1, 1), (1, 1, 1)]))
def test_star_variation(seed, eta):
    rng = np.random.default_rng(seed)
    n = len(eta)
    c = rng.normal(size=(n, n))
    chi = c - c.T
    res = variation_checks(eta, chi, rng.normal(size=2 ** n))
    assert res["commutator"] <= 1e-10 and res["blade"] <= 1e-10


# ------------------------------------------------------------------------------
# Finite-difference oracle for the algebraic derivatives of the quadratic
# Lagrangian L_g(theta, d theta). Everything is constant-coefficient numpy at a
# single point: theta^a = Q^a_mu dx^mu, F^a = d theta^a is held fixed in
# coordinates while Q moves, and vice versa.

ETA = (1, -1, -1, -1)
ALG = Algebra(ETA)
N, DIM = ALG.size, 4
SIGN = np.array(ALG.sign, dtype=float)
GRADES = ALG.grades
TOP = N - 1


def _prod(a, b, keep):
    out = np.zeros(N)
    for x in np.nonzero(a)[0]:
        for y in np.nonzero(b)[0]:
            if keep(x, y):
                out[x ^ y] += SIGN[x, y] * a[x] * b[y]
    return out


def _wedge(a, b):
    return _prod(a, b, lambda x, y: x & y == 0)


def _lc(a, b):
    return _prod(a, b, lambda x, y: x & y == x)


def _gp(a, b):
    return _prod(a, b, lambda x, y: True)


def _rev(a):
    return np.array([-a[m] if (GRADES[m] * (GRADES[m] - 1) // 2) % 2 else a[m]
                     for m in range(N)])


def _blade(*idx):
    v = np.zeros(N)
    v[sum(1 << i for i in idx)] = 1.0
    return v


_TAU = _blade(0, 1, 2, 3)
_TH = [_blade(a) for a in range(DIM)]
_LOW = [_TH[a] * ETA[a] for a in range(DIM)]


def _star(a):
    return _gp(_rev(a), _TAU)


def _star_inv(b):
    return _rev(_gp(b, _TAU)) * SIGN[TOP, TOP]


def _d(A, F):
    """d of a constant-coefficient frame form given d theta^i = F[i]."""
    out = np.zeros(N)
    for m in np.nonzero(A)[0]:
        idx = blade_indices(m)
        for j in range(len(idx)):
            acc = _blade()
            for k, i in enumerate(idx):
                acc = _wedge(acc, F[i] if k == j else _TH[i])
            out += A[m] * (-1) ** j * acc
    return out


def _lg(F):
    dlow = [F[a] * ETA[a] for a in range(DIM)]
    t1 = -0.5 * sum(_wedge(F[a], _star(dlow[a])) for a in range(DIM))
    dl = [-_star_inv(_d(_star(_TH[a]), F)) for a in range(DIM)]
    t2 = 0.5 * sum(_wedge(dl[a], _star(dl[a] * ETA[a])) for a in range(DIM))
    X = sum(_wedge(F[a], _LOW[a]) for a in range(DIM))
    return (t1 + t2 + 0.25 * _wedge(X, _star(X)))[TOP]


def _frame_two_form(Fc, Q):
    Qi = np.linalg.inv(Q)
    out = np.zeros(N)
    for m in np.nonzero(Fc)[0]:
        mu, nu = blade_indices(m)
        for a in range(DIM):
            for b in range(DIM):
                out += Fc[m] * Qi[mu][a] * Qi[nu][b] * _wedge(_TH[a], _TH[b])
    return out


def _density(Q, Fc):
    return _lg([_frame_two_form(Fc[a], Q) for a in range(DIM)]) * np.linalg.det(Q)


def _dual_slot(m):
    return _wedge(_blade(*blade_indices(TOP ^ m)), _blade(*blade_indices(m)))[TOP]


def _closed_forms(F, d_):
    """The assembled dL/d theta^d and dL/d(d theta^d) used by the library."""
    dlow = [F[a] * ETA[a] for a in range(DIM)]
    sdl = [_star(x) for x in dlow]
    st_ = [_star(t) for t in _TH]
    sdsl = [_star(_d(_star(_LOW[a]), F)) for a in range(DIM)]
    X = sum(_wedge(F[a], _LOW[a]) for a in range(DIM))
    sX = _star(X)
    ld = _LOW[d_]
    dth = (0.5 * sum(_wedge(_lc(ld, F[a]), sdl[a]) for a in range(DIM))
           - 0.5 * sum(_wedge(F[a], _lc(ld, sdl[a])) for a in range(DIM))
           + sum(_wedge(_d(_lc(ld, st_[a]), F), sdsl[a]) for a in range(DIM))
           + 0.5 * sum(_wedge(_lc(ld, _d(st_[a], F)), sdsl[a]) for a in range(DIM))
           + 0.5 * _wedge(dlow[d_], sX)
           - 0.25 * _wedge(X, _lc(ld, sX))
           - 0.25 * _wedge(_lc(ld, X), sX))
    ddth = (-sdl[d_] - sum(_wedge(_lc(ld, st_[a]), sdsl[a]) for a in range(DIM))
            + 0.5 * _wedge(ld, sX))
    return dth, ddth


@pytest.mark.parametrize("seed", [1, 2])
def test_euler_lagrange_pieces_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    Q = np.eye(DIM) + 0.3 * rng.normal(size=(DIM, DIM))
    Fc = [np.zeros(N) for _ in range(DIM)]
    for a in range(DIM):
        for m in ALG.masks_of_grade(2):
            Fc[a][m] = rng.normal()
    F = [_frame_two_form(Fc[a], Q) for a in range(DIM)]
    h = 1e-6
    detQ = np.linalg.det(Q)
    for d_ in range(DIM):
        want_th, want_F = _closed_forms(F, d_)
        got_th = np.zeros(N)
        for b in range(DIM):
            Qp, Qm = Q.copy(), Q.copy()
            Qp[d_] += h * Q[b]
            Qm[d_] -= h * Q[b]
            val = (_density(Qp, Fc) - _density(Qm, Fc)) / (2 * h) / detQ
            m = TOP ^ (1 << b)
            got_th[m] = val / _dual_slot(m)
        got_F = np.zeros(N)
        for m in ALG.masks_of_grade(2):
            k = _blade(*blade_indices(m))
            Fp = [f.copy() for f in F]
            Fm = [f.copy() for f in F]
            Fp[d_] = Fp[d_] + h * k
            Fm[d_] = Fm[d_] - h * k
            val = (_lg(Fp) - _lg(Fm)) / (2 * h)
            got_F[TOP ^ m] = val / _dual_slot(TOP ^ m)
        scale = 1 + np.max(np.abs(want_th))
        assert np.max(np.abs(got_th - want_th)) <= 1e-7 * scale
        assert np.max(np.abs(got_F - want_F)) <= 1e-7 * (1 + np.max(np.abs(want_F)))
