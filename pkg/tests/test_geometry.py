import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tetradlab.builtins import get_builtin
from tetradlab.geometry import (Chart, SingularError, coframe_from_metric, duality_residuals,
                                invert_matrix, lorentz_boost, manifold_from_metric,
                                metric_from_coframe, metric_residuals, sample_points,
                                transform_coframe)
from tetradlab.symexpr import Evaluator, const, sin

from conftest import BUILTIN_NAMES, evaluator, manifold, worst


def test_s2_metric_components():
    man = get_builtin("s2", R=2.0)
    pts = sample_points(man.chart, 6, 0)
    ev = Evaluator(pts)
    g = man.metric.g
    assert np.allclose(ev(g[0][0]), 4.0)
    assert np.allclose(ev(g[1][1]), 4.0 * np.sin(pts[:, 0]) ** 2)
    assert np.allclose(ev(g[0][1]), 0.0)


def test_inverse_of_constant_matrix():
    m = [[const(2.0), const(0.0)], [const(1.0), const(3.0)]]
    inv = invert_matrix(m)
    got = np.array([[e.val for e in row] for row in inv])
    assert np.allclose(got, [[0.5, 0.0], [-1.0 / 6.0, 1.0 / 3.0]])


def test_singular_matrix_names_point():
    chart = Chart(2, ("u", "v"), ((-1.0, 1.0), (-1.0, 1.0)), (2, 0))
    u = chart.coord(0)
    pts = np.array([[0.5, 0.0], [0.0, 0.3]])
    with pytest.raises(SingularError) as info:
        invert_matrix([[u, const(0.0)], [const(0.0), const(1.0)]], pts)
    assert tuple(info.value.point) == (0.0, 0.3)


def test_sampling_is_deterministic_and_inside():
    chart = manifold("schwarzschild").chart
    a = sample_points(chart, 20, 5)
    assert np.array_equal(a, sample_points(chart, 20, 5))
    assert not np.array_equal(a, sample_points(chart, 20, 6))
    lo = np.array([d[0] for d in chart.domain])
    hi = np.array([d[1] for d in chart.domain])
    assert np.all(a > lo) and np.all(a < hi)


@pytest.mark.parametrize("bad", [
    dict(dim=5, coord_names=tuple("abcde"), domain=((0, 1),) * 5, signature=(5, 0)),
    dict(dim=2, coord_names=("a", "a"), domain=((0, 1),) * 2, signature=(2, 0)),
    dict(dim=2, coord_names=("a", "b"), domain=((1, 0), (0, 1)), signature=(2, 0)),
    dict(dim=2, coord_names=("a", "b"), domain=((0, 1),) * 2, signature=(1, 0)),
])
def test_chart_validation(bad):
    with pytest.raises(ValueError):
        Chart(**bad)


def test_builtin_relations(builtin_name):
    man = manifold(builtin_name)
    ev = evaluator(builtin_name)
    assert worst(ev, duality_residuals(man.coframe)) <= 1e-12
    assert worst(ev, metric_residuals(man.coframe, man.metric)) <= 1e-10


def test_unknown_builtin():
    with pytest.raises(ValueError, match="unknown built-in"):
        get_builtin("torus")


def test_metric_factorization_recovers_schwarzschild_metric():
    src = manifold("schwarzschild")
    pts = sample_points(src.chart, 12, 2)
    man = manifold_from_metric("sch", src.chart, [list(r) for r in src.metric.g], pts)
    ev = Evaluator(pts)
    assert worst(ev, metric_residuals(man.coframe, man.metric)) <= 1e-10
    rebuilt = metric_from_coframe(man.coframe)
    assert worst(ev, [rebuilt.g[i][j] - src.metric.g[i][j]
                      for i in range(4) for j in range(4)]) <= 1e-10


def test_metric_factorization_with_off_diagonal_entry():
    chart = Chart(2, ("u", "v"), ((0.5, 1.5), (0.0, 1.0)), (1, 1))
    u = chart.coord(0)
    g = [[const(1.0), u * 0.5], [u * 0.5, const(-2.0)]]
    pts = sample_points(chart, 10, 0)
    cf = coframe_from_metric(chart, g, pts)
    gm = metric_from_coframe(cf)
    ev = Evaluator(pts)
    assert worst(ev, [gm.g[i][j] - g[i][j] for i in range(2) for j in range(2)]) <= 1e-12


def test_metric_signature_mismatch():
    chart = Chart(2, ("u", "v"), ((0.5, 1.5), (0.0, 1.0)), (2, 0))
    g = [[const(1.0), const(0.0)], [const(0.0), const(-1.0)]]
    with pytest.raises(ValueError, match="signature"):
        coframe_from_metric(chart, g, sample_points(chart, 4, 0))


def test_pivot_changing_sign_is_rejected():
    chart = Chart(2, ("u", "v"), ((-1.0, 1.0), (0.0, 1.0)), (2, 0))
    u = chart.coord(0)
    g = [[u, const(0.0)], [const(0.0), const(1.0)]]
    with pytest.raises(SingularError):
        coframe_from_metric(chart, g, sample_points(chart, 16, 0))


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0, 2 * math.pi),
       st.sampled_from(["minkowski", "schwarzschild", "s2"]))
def test_metric_is_frame_independent(rapidity, angle, name):
    man = manifold(name)
    L = lorentz_boost(man.chart.eta, rapidity, angle)
    eta = np.diag(man.chart.eta)
    assert np.allclose(L.T @ eta @ L, eta)
    moved = metric_from_coframe(transform_coframe(man.coframe, L))
    ev = evaluator(name, 4, 9)
    n = man.dim
    scale = 1 + worst(ev, [list(r) for r in man.metric.g])
    assert worst(ev, [moved.g[i][j] - man.metric.g[i][j] for i in range(n) for j in range(n)]) \
        <= 1e-11 * scale
