"""Built-in manifold catalog."""
from __future__ import annotations

import math

from .geometry import Chart, Manifold, manifold_from_coframe
from .symexpr import ONE, ZERO, exp, ln, sin, sqrt


def minkowski() -> Manifold:
    chart = Chart(4, ("t", "x", "y", "z"), ((-5.0, 5.0),) * 4, (1, 3))
    q = [[ONE if a == m else ZERO for m in range(4)] for a in range(4)]
    return manifold_from_coframe("minkowski", chart, q)


def s2(R: float = 1.0) -> Manifold:
    """Round sphere of radius R: theta^1 = R dx1, theta^2 = R sin(x1) dx2."""
    if R <= 0:
        raise ValueError("radius must be positive")
    chart = Chart(2, ("x1", "x2"), ((0.0, math.pi), (0.0, 2 * math.pi)), (2, 0))
    x1 = chart.coord(0)
    q = [[R * ONE, ZERO], [ZERO, R * sin(x1)]]
    return manifold_from_coframe("s2", chart, q, params={"R": R})


def schwarzschild(M: float = 1.0) -> Manifold:
    """Exterior region in Schwarzschild coordinates, sampled on r in (3M, 20M)."""
    if M <= 0:
        raise ValueError("mass must be positive")
    chart = Chart(4, ("t", "r", "th", "ph"),
                  ((-5.0, 5.0), (3.0 * M, 20.0 * M), (0.0, math.pi), (0.0, 2 * math.pi)),
                  (1, 3))
    r, th = chart.coord(1), chart.coord(2)
    f = 1.0 - 2.0 * M / r
    q = [[sqrt(f), ZERO, ZERO, ZERO],
         [ZERO, 1.0 / sqrt(f), ZERO, ZERO],
         [ZERO, ZERO, r, ZERO],
         [ZERO, ZERO, ZERO, r * sin(th)]]
    return manifold_from_coframe("schwarzschild", chart, q, params={"M": M})


def flrw_dust() -> Manifold:
    """Flat dust-filled universe, a(t) = t^(2/3), sampled on t in (1, 10)."""
    chart = Chart(4, ("t", "x", "y", "z"), ((1.0, 10.0),) + ((-5.0, 5.0),) * 3, (1, 3))
    t = chart.coord(0)
    a = exp((2.0 / 3.0) * ln(t))
    q = [[ONE if (i == j == 0) else (a if i == j else ZERO) for j in range(4)]
         for i in range(4)]
    return manifold_from_coframe("flrw-dust", chart, q)


BUILTINS = {
    "minkowski": (minkowski, "flat spacetime, Cartesian chart, identity coframe"),
    "s2": (s2, "round 2-sphere of radius R (default 1), frame R dx1, R sin(x1) dx2"),
    "schwarzschild": (schwarzschild, "vacuum exterior of mass M (default 1), r in (3M, 20M)"),
    "flrw-dust": (flrw_dust, "spatially flat dust universe with a(t) = t^(2/3), t in (1, 10)"),
}


def get_builtin(name: str, **params) -> Manifold:
    try:
        factory = BUILTINS[name][0]
    except KeyError:
        raise ValueError(f"unknown built-in {name!r}; choose from {', '.join(BUILTINS)}") from None
    return factory(**params)


__all__ = ["minkowski", "s2", "schwarzschild", "flrw_dust", "BUILTINS", "get_builtin"]
