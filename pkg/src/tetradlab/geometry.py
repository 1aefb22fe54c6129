"""Charts plus the metric and orthonormal coframe living on them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symexpr import ONE, ZERO, Evaluator, Expr, add_all, const, sqrt, var

Matrix = list  # list of rows of Expr


class SingularError(ArithmeticError):
    """A matrix field is singular at some sample point."""

    def __init__(self, what: str, point=None):
        where = "" if point is None else f" at point {tuple(float(v) for v in point)}"
        super().__init__(f"singular {what}{where}")
        self.point = point


@dataclass(frozen=True)
class Chart:
    dim: int
    coord_names: tuple
    domain: tuple  # ((lo, hi), ...) open sampling intervals
    signature: tuple  # (p, q): eta = diag(+1 * p, -1 * q)

    def __post_init__(self):
        if self.dim not in (2, 3, 4):
            raise ValueError(f"chart dimension must be 2, 3 or 4, got {self.dim}")
        if len(self.coord_names) != self.dim or len(set(self.coord_names)) != self.dim:
            raise ValueError("need one distinct coordinate name per dimension")
        if len(self.domain) != self.dim:
            raise ValueError("need one sampling interval per coordinate")
        for lo, hi in self.domain:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bad sampling interval ({lo}, {hi})")
        p, q = self.signature
        if p < 0 or q < 0 or p + q != self.dim:
            raise ValueError(f"signature {self.signature} does not match dimension {self.dim}")

    @property
    def eta(self) -> tuple:
        p, q = self.signature
        return (1,) * p + (-1,) * q

    def coord(self, i: int) -> Expr:
        return var(i, self.coord_names[i])

    @property
    def coords(self) -> list:
        return [self.coord(i) for i in range(self.dim)]


def sample_points(chart: Chart, count: int, seed: int) -> np.ndarray:
    """Deterministic uniform samples kept 1% of each interval away from its ends."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in chart.domain], dtype=float)
    hi = np.array([b for _, b in chart.domain], dtype=float)
    margin = 0.01 * (hi - lo)
    return rng.uniform(lo + margin, hi - margin, size=(count, chart.dim))


# ---------------------------------------------------------------- matrices

def _det(m: Matrix, rows: tuple, cols: tuple) -> Expr:
    """Laplace expansion along the first row, skipping structural zeros."""
    if len(rows) == 1:
        return m[rows[0]][cols[0]]
    r0, rest = rows[0], rows[1:]
    terms = []
    for k, c in enumerate(cols):
        a = m[r0][c]
        if a.is_zero:
            continue
        minor = _det(m, rest, cols[:k] + cols[k + 1:])
        if minor.is_zero:
            continue
        t = a * minor
        terms.append(-t if k % 2 else t)
    return add_all(terms)


def det(m: Matrix) -> Expr:
    n = len(m)
    return _det(m, tuple(range(n)), tuple(range(n)))


def minor_det(m: Matrix, rows, cols) -> Expr:
    return _det(m, tuple(rows), tuple(cols))


def _blocks(m: Matrix) -> list:
    """Index sets of the connected components of the nonzero pattern."""
    n = len(m)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(n):
            if not m[i][j].is_zero or not m[j][i].is_zero:
                parent[find(i)] = find(j)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def invert_matrix(m: Matrix, points=None) -> Matrix:
    """Symbolic inverse by cofactors, block by block.

    With ``points`` given the determinant is checked there and a
    :class:`SingularError` names the first bad point.
    """
    n = len(m)
    if points is not None:
        check_nonsingular(m, points, "matrix")
    inv = [[ZERO] * n for _ in range(n)]
    for block in _blocks(m):
        rows = tuple(block)
        if len(rows) == 1:
            i = rows[0]
            inv[i][i] = ONE / m[i][i]
            continue
        d = _det(m, rows, rows)
        if d.is_zero:
            raise SingularError("matrix (determinant is identically 0)")
        for a, i in enumerate(rows):
            for b, j in enumerate(rows):
                # inverse[i][j] = cofactor(j, i) / det
                cof = _det(m, rows[:b] + rows[b + 1:], rows[:a] + rows[a + 1:])
                if cof.is_zero:
                    continue
                inv[i][j] = (-cof if (a + b) % 2 else cof) / d
    return inv


def check_nonsingular(m: Matrix, points, what: str, tol: float = 1e-12):
    ev = Evaluator(points)
    vals = ev(det(m))
    bad = np.flatnonzero(np.abs(vals) < tol)
    if bad.size:
        raise SingularError(what, ev.points[bad[0]])


# ---------------------------------------------------------------- fields

@dataclass(frozen=True)
class MetricField:
    g: tuple
    ginv: tuple

    @property
    def dim(self) -> int:
        return len(self.g)


@dataclass(frozen=True)
class Coframe:
    """Rows are orthonormal labels a, columns coordinate indices mu: q[a][mu] = q^a_mu."""

    chart: Chart
    q: tuple
    qinv: tuple  # qinv[a][mu] = q_a^mu, components of the frame vector e_a

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def eta(self) -> tuple:
        return self.chart.eta


def _freeze(m) -> tuple:
    return tuple(tuple(row) for row in m)


def make_coframe(chart: Chart, q, points=None) -> Coframe:
    qq = [[e if isinstance(e, Expr) else const(e) for e in row] for row in q]
    if len(qq) != chart.dim or any(len(r) != chart.dim for r in qq):
        raise ValueError("coframe must be dim x dim")
    if points is not None:
        check_nonsingular(qq, points, "coframe")
    return Coframe(chart, _freeze(qq), _freeze(invert_coframe(qq)))


def invert_coframe(q) -> Matrix:
    """Rows of the result are a, columns mu: the dual frame q_a^mu."""
    # q_a^mu is the transpose of the inverse of the matrix q^a_mu
    inv = invert_matrix([list(r) for r in q])
    n = len(inv)
    return [[inv[mu][a] for mu in range(n)] for a in range(n)]


def metric_from_coframe(cf: Coframe, points=None) -> MetricField:
    """g_{mu nu} = eta_ab q^a_mu q^b_nu and its contravariant partner."""
    if points is not None:
        check_nonsingular([list(r) for r in cf.q], points, "coframe")
    n, eta = cf.dim, cf.eta
    g = [[add_all(eta[a] * cf.q[a][m] * cf.q[a][v] for a in range(n)) for v in range(n)]
         for m in range(n)]
    gi = [[add_all(eta[a] * cf.qinv[a][m] * cf.qinv[a][v] for a in range(n)) for v in range(n)]
          for m in range(n)]
    return MetricField(_freeze(g), _freeze(gi))


def coframe_from_metric(chart: Chart, g, points) -> Coframe:
    """Orthonormalize dx^0, dx^1, ... in order (an LDL^T factorization).

    The pivots' signs are read at ``points`` and must be constant there; rows
    are then ordered so that positive-norm rows come first, matching eta.
    """
    n = chart.dim
    g = [[e if isinstance(e, Expr) else const(e) for e in row] for row in g]
    ev = Evaluator(points)
    L = [[ZERO] * n for _ in range(n)]
    D = [ZERO] * n
    signs = []
    for j in range(n):
        L[j][j] = ONE
        D[j] = g[j][j] - add_all(L[j][k] * L[j][k] * D[k] for k in range(j))
        vals = ev(D[j])
        if np.any(np.abs(vals) < 1e-12):
            bad = int(np.flatnonzero(np.abs(vals) < 1e-12)[0])
            raise SingularError("metric (zero pivot)", ev.points[bad])
        s = np.sign(vals)
        if np.any(s != s[0]):
            raise SingularError("metric (pivot changes sign on the domain)")
        signs.append(int(s[0]))
        for i in range(j + 1, n):
            L[i][j] = (g[i][j] - add_all(L[i][k] * L[j][k] * D[k] for k in range(j))) / D[j]
    rows = []
    for j in range(n):
        scale = sqrt(D[j] if signs[j] > 0 else -D[j])
        rows.append([scale * L[i][j] if i >= j else ZERO for i in range(n)])
    pos = [r for r, s in zip(rows, signs) if s > 0]
    neg = [r for r, s in zip(rows, signs) if s < 0]
    if (len(pos), len(neg)) != tuple(chart.signature):
        raise ValueError(
            f"metric signature ({len(pos)},{len(neg)}) differs from declared {chart.signature}")
    return make_coframe(chart, pos + neg, points)


# ---------------------------------------------------------------- checks

def duality_residuals(cf: Coframe) -> list:
    """Both relations q_a^mu q^b_mu = delta and q_a^mu q^a_nu = delta, as residual fields."""
    n = cf.dim
    out = []
    for a in range(n):
        for b in range(n):
            s = add_all(cf.qinv[a][m] * cf.q[b][m] for m in range(n))
            out.append(s - (1.0 if a == b else 0.0))
    for m in range(n):
        for v in range(n):
            s = add_all(cf.qinv[a][m] * cf.q[a][v] for a in range(n))
            out.append(s - (1.0 if m == v else 0.0))
    return out


def orthonormality_residuals(cf: Coframe, metric: MetricField) -> list:
    """g(theta^a, theta^b) - eta^ab using the contravariant metric."""
    n = cf.dim
    out = []
    for a in range(n):
        for b in range(n):
            s = add_all(metric.ginv[m][v] * cf.q[a][m] * cf.q[b][v]
                        for m in range(n) for v in range(n))
            out.append(s - (cf.eta[a] if a == b else 0.0))
    return out


def metric_residuals(cf: Coframe, metric: MetricField) -> list:
    """All four metric/coframe relations: g from q, g^-1 from q^-1, g g^-1 = 1, orthonormality."""
    n, eta = cf.dim, cf.eta
    out = []
    for m in range(n):
        for v in range(n):
            out.append(metric.g[m][v] - add_all(eta[a] * cf.q[a][m] * cf.q[a][v] for a in range(n)))
            out.append(metric.ginv[m][v]
                       - add_all(eta[a] * cf.qinv[a][m] * cf.qinv[a][v] for a in range(n)))
            out.append(add_all(metric.g[m][k] * metric.ginv[k][v] for k in range(n))
                       - (1.0 if m == v else 0.0))
    return out + orthonormality_residuals(cf, metric)


def lorentz_boost(eta, rapidity: float, angle: float) -> np.ndarray:
    """A constant matrix L with L^T eta L = eta, mixing the first two (boost or rotation) slots
    and rotating the last two."""
    n = len(eta)
    L = np.eye(n)
    if eta[0] * eta[1] < 0:
        c, s = np.cosh(rapidity), np.sinh(rapidity)
        L[:2, :2] = [[c, s], [s, c]]
    else:
        c, s = np.cos(rapidity), np.sin(rapidity)
        L[:2, :2] = [[c, -s], [s, c]]
    if n >= 4 and eta[2] == eta[3]:
        c, s = np.cos(angle), np.sin(angle)
        L[2:4, 2:4] = [[c, -s], [s, c]]
    return L


def transform_coframe(cf: Coframe, L) -> Coframe:
    """theta'^a = L^a_b theta^b for a constant matrix L."""
    n = cf.dim
    q = [[add_all(float(L[a][b]) * cf.q[b][m] for b in range(n)) for m in range(n)]
         for a in range(n)]
    return make_coframe(cf.chart, q)


@dataclass(frozen=True)
class Manifold:
    """A chart with its coframe, metric and (for reports) a name."""

    name: str
    chart: Chart
    coframe: Coframe
    metric: MetricField
    params: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.chart.dim


def manifold_from_coframe(name: str, chart: Chart, q, points=None, params=None) -> Manifold:
    cf = make_coframe(chart, q, points)
    return Manifold(name, chart, cf, metric_from_coframe(cf), dict(params or {}))


def manifold_from_metric(name: str, chart: Chart, g, points, params=None) -> Manifold:
    cf = coframe_from_metric(chart, g, points)
    g = [[e if isinstance(e, Expr) else const(e) for e in row] for row in g]
    return Manifold(name, chart, cf, MetricField(_freeze(g), _freeze(invert_matrix(g))),
                    dict(params or {}))


def permutation_sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


__all__ = [
    "Chart", "MetricField", "Coframe", "Manifold", "SingularError", "sample_points",
    "invert_matrix", "invert_coframe", "make_coframe", "metric_from_coframe",
    "coframe_from_metric", "duality_residuals", "orthonormality_residuals",
    "metric_residuals", "det", "minor_det", "manifold_from_coframe", "manifold_from_metric",
    "lorentz_boost", "transform_coframe", "permutation_sign",
]
