"""Connection coefficients and the covariant derivatives of q, with torsion and curvature.

Array layouts, fixed everywhere:

* ``gamma[r][m][n]``  = Gamma^r_{mn},  nabla+_{d_m} d_n = Gamma^r_{mn} d_r
* ``omega[a][m][b]``  = omega^a_{mb},  nabla+_{d_m} e_b = omega^a_{mb} e_a
* q-derivative arrays ``[a][m][n]`` = (upper frame a, derivative slot m, form slot n)
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .geometry import Coframe, Manifold, MetricField
from .symexpr import ZERO, Expr, add_all, diff

LEVI_CIVITA = "levicivita"
COLUMBUS = "columbus"
CUSTOM = "custom"


class Flavor(str, Enum):
    LEVI_CIVITA = LEVI_CIVITA
    TELEPARALLEL = COLUMBUS
    CUSTOM = CUSTOM


class FlavorError(ValueError):
    """Operation needs a different connection flavor."""


def _arr(shape, fill=ZERO):
    if len(shape) == 1:
        return [fill] * shape[0]
    return [_arr(shape[1:], fill) for _ in range(shape[0])]


def _freeze(a):
    if isinstance(a, list):
        return tuple(_freeze(x) for x in a)
    return a


@dataclass(frozen=True)
class Connection:
    gamma: tuple
    omega: tuple
    flavor: Flavor
    coframe: Coframe

    @property
    def dim(self) -> int:
        return self.coframe.dim

    def frame_omega(self) -> tuple:
        """omega^c_{ab} = q_a^mu omega^c_{mu b}: nabla_{e_a} e_b = omega^c_{ab} e_c."""
        return frame_omega(self.coframe, self.omega)

    def require(self, *flavors):
        if self.flavor not in flavors:
            names = ", ".join(f.value for f in flavors)
            raise FlavorError(f"needs a {names} connection, got {self.flavor.value}")


# ------------------------------------------------------------ coefficients

def christoffel(metric: MetricField) -> tuple:
    """Gamma^r_{mn} = 1/2 g^{rs}(d_m g_{sn} + d_n g_{sm} - d_s g_{mn})."""
    n = metric.dim
    g, gi = metric.g, metric.ginv
    low = _arr((n, n, n))  # Gamma_{s m n}
    for s in range(n):
        for m in range(n):
            for v in range(m, n):
                e = 0.5 * (diff(g[s][v], m) + diff(g[s][m], v) - diff(g[m][v], s))
                low[s][m][v] = low[s][v][m] = e
    gam = _arr((n, n, n))
    for r in range(n):
        for m in range(n):
            for v in range(m, n):
                e = add_all(gi[r][s] * low[s][m][v] for s in range(n))
                gam[r][m][v] = gam[r][v][m] = e
    return _freeze(gam)


def spin_connection(cf: Coframe, gamma) -> tuple:
    """Solve the freshman identity for omega^a_{mb} = (Gamma^s_{mn} q^a_s - d_m q^a_n) q_b^n."""
    n = cf.dim
    q, qi = cf.q, cf.qinv
    om = _arr((n, n, n))
    for a in range(n):
        for m in range(n):
            inner = [add_all(gamma[s][m][v] * q[a][s] for s in range(n)) - diff(q[a][v], m)
                     for v in range(n)]
            for b in range(n):
                om[a][m][b] = add_all(inner[v] * qi[b][v] for v in range(n))
    return _freeze(om)


def gamma_from_omega(cf: Coframe, omega) -> tuple:
    """Inverse direction: Gamma^r_{mn} = q_a^r (d_m q^a_n + omega^a_{mb} q^b_n)."""
    n = cf.dim
    q, qi = cf.q, cf.qinv
    gam = _arr((n, n, n))
    for m in range(n):
        for v in range(n):
            col = [diff(q[a][v], m) + add_all(omega[a][m][b] * q[b][v] for b in range(n))
                   for a in range(n)]
            for r in range(n):
                gam[r][m][v] = add_all(qi[a][r] * col[a] for a in range(n))
    return _freeze(gam)


def frame_omega(cf: Coframe, omega) -> tuple:
    n = cf.dim
    out = _arr((n, n, n))
    for c in range(n):
        for a in range(n):
            for b in range(n):
                out[c][a][b] = add_all(cf.qinv[a][m] * omega[c][m][b] for m in range(n))
    return _freeze(out)


def levi_civita(man: Manifold) -> Connection:
    gam = christoffel(man.metric)
    return Connection(gam, spin_connection(man.coframe, gam), Flavor.LEVI_CIVITA, man.coframe)


def columbus_connection(cf: Coframe) -> Connection:
    """Teleparallel connection with nabla e_b = 0: omega = 0, Gamma^r_{mn} = q_a^r d_m q^a_n."""
    n = cf.dim
    om = _freeze(_arr((n, n, n)))
    return Connection(gamma_from_omega(cf, om), om, Flavor.TELEPARALLEL, cf)


def custom_connection(cf: Coframe, gamma) -> Connection:
    gam = _freeze([[list(r) for r in blk] for blk in gamma])
    return Connection(gam, spin_connection(cf, gam), Flavor.CUSTOM, cf)


def mismatched(conn: Connection, omega) -> Connection:
    """Pair the Gamma of ``conn`` with foreign omega coefficients (diagnostic only)."""
    return Connection(conn.gamma, _freeze([[list(r) for r in blk] for blk in omega]),
                      Flavor.CUSTOM, conn.coframe)


def build_connection(man: Manifold, flavor: str, gamma=None) -> Connection:
    if flavor == LEVI_CIVITA:
        return levi_civita(man)
    if flavor == COLUMBUS:
        return columbus_connection(man.coframe)
    if flavor == CUSTOM:
        if gamma is None:
            raise ValueError("custom connection needs gamma coefficients")
        return custom_connection(man.coframe, gamma)
    raise ValueError(f"unknown connection flavor {flavor!r}")


# ------------------------------------------------------------ q derivatives

def nabla_minus_q(cf: Coframe, conn: Connection) -> tuple:
    """nabla-_m q^a_n = d_m q^a_n - Gamma^b_{mn} q^a_b: components of nabla-_{d_m} theta^a."""
    n = cf.dim
    q, gam = cf.q, conn.gamma
    return _freeze([[[diff(q[a][v], m) - add_all(gam[b][m][v] * q[a][b] for b in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


def nabla_minus_q_from_omega(cf: Coframe, conn: Connection) -> tuple:
    """The same array read off the spin connection: -omega^a_{mb} q^b_n."""
    n = cf.dim
    return _freeze([[[-add_all(conn.omega[a][m][b] * cf.q[b][v] for b in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


def nabla_plus_q(cf: Coframe, conn: Connection) -> tuple:
    """nabla+_m q^a_n = d_m q^a_n + q^b_n omega^a_{mb}: frame components of nabla+_{d_m} d_n."""
    n = cf.dim
    q, om = cf.q, conn.omega
    return _freeze([[[diff(q[a][v], m) + add_all(q[b][v] * om[a][m][b] for b in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


def nabla_plus_q_from_gamma(cf: Coframe, conn: Connection) -> tuple:
    """Gamma^r_{mn} q^a_r."""
    n = cf.dim
    return _freeze([[[add_all(conn.gamma[r][m][v] * cf.q[a][r] for r in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


def nabla_q(cf: Coframe, conn: Connection) -> tuple:
    """Components of nabla Q: d_m q^a_n - Gamma^b_{mn} q^a_b + omega^a_{mb} q^b_n."""
    n = cf.dim
    q, gam, om = cf.q, conn.gamma, conn.omega
    return _freeze([[[diff(q[a][v], m)
                      - add_all(gam[b][m][v] * q[a][b] for b in range(n))
                      + add_all(om[a][m][b] * q[b][v] for b in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


# ------------------------------------------------------------ torsion

def structure_coefficients(cf: Coframe) -> tuple:
    """c^d_{ab} with [e_a, e_b] = c^d_{ab} e_d."""
    n = cf.dim
    qi, q = cf.qinv, cf.q
    comm = _arr((n, n, n))  # [e_a, e_b]^mu
    for a in range(n):
        for b in range(a + 1, n):
            for mu in range(n):
                e = add_all(qi[a][v] * diff(qi[b][mu], v) - qi[b][v] * diff(qi[a][mu], v)
                            for v in range(n))
                comm[a][b][mu] = e
                comm[b][a][mu] = -e
    c = _arr((n, n, n))
    for d in range(n):
        for a in range(n):
            for b in range(n):
                c[d][a][b] = add_all(q[d][mu] * comm[a][b][mu] for mu in range(n))
    return _freeze(c)


def torsion_from_commutator(conn: Connection, frame: str = "coordinate") -> tuple:
    """Torsion from tau(X,Y) = nabla_X Y - nabla_Y X - [X,Y].

    ``coordinate``: T^r_{mn} = Gamma^r_{mn} - Gamma^r_{nm}.
    ``orthonormal``: T^d_{ab} = omega^d_{ab} - omega^d_{ba} - c^d_{ab}.
    """
    n = conn.dim
    if frame == "coordinate":
        g = conn.gamma
        return _freeze([[[g[r][m][v] - g[r][v][m] for v in range(n)] for m in range(n)]
                        for r in range(n)])
    if frame == "orthonormal":
        w = conn.frame_omega()
        c = structure_coefficients(conn.coframe)
        return _freeze([[[w[d][a][b] - w[d][b][a] - c[d][a][b] for b in range(n)]
                         for a in range(n)] for d in range(n)])
    raise ValueError(f"frame must be 'coordinate' or 'orthonormal', got {frame!r}")


def torsion_from_tetrad_components(cf: Coframe, conn: Connection,
                                   wrong_minus: bool = False) -> tuple:
    """T^a_{mn} = nabla+_m q^a_n - nabla+_n q^a_m.

    ``wrong_minus`` swaps in nabla-, reproducing the classic mistake.
    """
    n = cf.dim
    d = nabla_minus_q(cf, conn) if wrong_minus else nabla_plus_q(cf, conn)
    return _freeze([[[d[a][m][v] - d[a][v][m] for v in range(n)] for m in range(n)]
                    for a in range(n)])


def torsion_to_tetrad_slots(cf: Coframe, coord_torsion) -> tuple:
    """T^a_{mn} = q^a_r T^r_{mn}."""
    n = cf.dim
    return _freeze([[[add_all(cf.q[a][r] * coord_torsion[r][m][v] for r in range(n))
                      for v in range(n)] for m in range(n)] for a in range(n)])


def torsion_to_frame_slots(cf: Coframe, tetrad_torsion) -> tuple:
    """T^d_{ab} = T^d_{mn} q_a^m q_b^n."""
    n = cf.dim
    qi = cf.qinv
    half = [[[add_all(tetrad_torsion[d][m][v] * qi[b][v] for v in range(n)) for b in range(n)]
             for m in range(n)] for d in range(n)]
    return _freeze([[[add_all(qi[a][m] * half[d][m][b] for m in range(n)) for b in range(n)]
                     for a in range(n)] for d in range(n)])


# ------------------------------------------------------------ curvature

@dataclass(frozen=True)
class CurvatureTensor:
    """riemann[r][s][m][n] = R^r_{smn}; ricci[s][n] = R^r_{srn}; mixed ricci[m][b] = g^{ms}R_{sb}.

    ``frame_riemann[a][b][c][d]`` holds the orthonormal components R^a_{bcd}
    and ``frame_ricci[a][b]`` = R^a_b = eta^{ac} R^d_{cdb}.
    """

    riemann: tuple
    ricci: tuple
    ricci_mixed: tuple
    scalar: Expr
    frame_riemann: tuple
    frame_ricci: tuple


def riemann_tensor(gamma) -> tuple:
    """R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}."""
    n = len(gamma)
    R = _arr((n, n, n, n))
    for r in range(n):
        for s in range(n):
            for m in range(n):
                for v in range(m + 1, n):
                    e = (diff(gamma[r][v][s], m) - diff(gamma[r][m][s], v)
                         + add_all(gamma[r][m][l] * gamma[l][v][s]
                                   - gamma[r][v][l] * gamma[l][m][s] for l in range(n)))
                    R[r][s][m][v] = e
                    R[r][s][v][m] = -e
    return _freeze(R)


def curvature(conn: Connection, metric: MetricField) -> CurvatureTensor:
    cf = conn.coframe
    n = cf.dim
    R = riemann_tensor(conn.gamma)
    ric = [[add_all(R[r][s][r][v] for r in range(n)) for v in range(n)] for s in range(n)]
    gi = metric.ginv
    mixed = [[add_all(gi[m][s] * ric[s][b] for s in range(n)) for b in range(n)]
             for m in range(n)]
    scalar = add_all(mixed[m][m] for m in range(n))
    q, qi = cf.q, cf.qinv
    # successive single-index transforms keep this O(n^5)
    t1 = [[[[add_all(q[a][r] * R[r][s][m][v] for r in range(n)) for v in range(n)]
            for m in range(n)] for s in range(n)] for a in range(n)]
    t2 = [[[[add_all(t1[a][s][m][v] * qi[b][s] for s in range(n)) for v in range(n)]
            for m in range(n)] for b in range(n)] for a in range(n)]
    t3 = [[[[add_all(t2[a][b][m][v] * qi[c][m] for m in range(n)) for v in range(n)]
            for c in range(n)] for b in range(n)] for a in range(n)]
    fr = [[[[add_all(t3[a][b][c][v] * qi[d][v] for v in range(n)) for d in range(n)]
            for c in range(n)] for b in range(n)] for a in range(n)]
    eta = cf.eta
    fric = [[eta[a] * add_all(fr[d][a][d][b] for d in range(n)) for b in range(n)]
            for a in range(n)]
    return CurvatureTensor(_freeze(R), _freeze(ric), _freeze(mixed), scalar, _freeze(fr),
                           _freeze(fric))


def first_bianchi_residuals(R) -> list:
    n = len(R)
    return [R[r][s][m][v] + R[r][m][v][s] + R[r][v][s][m]
            for r in range(n) for s in range(n) for m in range(n) for v in range(n)]


def metric_compatibility_residuals(conn: Connection, metric: MetricField) -> list:
    """nabla_l g_{mn} = d_l g_{mn} - Gamma^k_{lm} g_{kn} - Gamma^k_{ln} g_{mk}."""
    n = conn.dim
    g, gam = metric.g, conn.gamma
    return [diff(g[m][v], l) - add_all(gam[k][l][m] * g[k][v] + gam[k][l][v] * g[m][k]
                                       for k in range(n))
            for l in range(n) for m in range(n) for v in range(n)]


def omega_antisymmetry_residuals(conn: Connection) -> list:
    """omega_{abc} + omega_{cba} with omega_{abc} = eta_ad omega^d_{bc}."""
    w = conn.frame_omega()
    eta = conn.coframe.eta
    n = conn.dim
    return [eta[a] * w[a][b][c] + eta[c] * w[c][b][a]
            for a in range(n) for b in range(n) for c in range(n)]


# ------------------------------------------------------------ wave equation for Q

def wave_equation_q(cf: Coframe, conn: Connection, metric: MetricField) -> tuple:
    """Components (b, mu) of g^{ab} nabla_a nabla_b Q split into its nabla+/nabla- pieces.

    The three pieces are: e_b (x) g nabla-nabla- theta^b, the term with both
    derivatives on e_a, and twice the cross term. Every piece is computed on
    its own, so the sum vanishing is a genuine consistency check.
    """
    conn.require(Flavor.LEVI_CIVITA)
    n = cf.dim
    q, gi, gam, om = cf.q, metric.ginv, conn.gamma, conn.omega
    V = nabla_minus_q(cf, conn)
    out = _arr((n, n))
    for b in range(n):
        for mu in range(n):
            # g^{ab}(d_a V^b_{b mu} - Gamma^s_{a mu} V^b_{b s}), the composed nabla- nabla-
            lap = add_all(gi[al][be] * (diff(V[b][be][mu], al)
                                        - add_all(gam[s][al][mu] * V[b][be][s] for s in range(n)))
                          for al in range(n) for be in range(n) if not gi[al][be].is_zero)
            plus = add_all(gi[al][be] * (diff(om[b][be][a], al)
                                         + add_all(om[b][al][d] * om[d][be][a] for d in range(n)))
                           * q[a][mu]
                           for al in range(n) for be in range(n) for a in range(n)
                           if not gi[al][be].is_zero)
            cross = add_all(gi[al][be] * om[b][be][a] * om[a][al][c] * q[c][mu]
                            for al in range(n) for be in range(n) for a in range(n)
                            for c in range(n) if not gi[al][be].is_zero)
            out[b][mu] = lap + plus - 2.0 * cross
    return _freeze(out)


__all__ = [
    "Connection", "Flavor", "FlavorError", "CurvatureTensor", "christoffel", "spin_connection",
    "gamma_from_omega", "frame_omega", "levi_civita", "columbus_connection", "custom_connection",
    "mismatched", "build_connection", "nabla_minus_q", "nabla_minus_q_from_omega", "nabla_plus_q",
    "nabla_plus_q_from_gamma", "nabla_q", "structure_coefficients", "torsion_from_commutator",
    "torsion_from_tetrad_components", "torsion_to_tetrad_slots", "torsion_to_frame_slots",
    "riemann_tensor", "curvature", "first_bianchi_residuals", "metric_compatibility_residuals",
    "omega_antisymmetry_residuals", "wave_equation_q",
]
