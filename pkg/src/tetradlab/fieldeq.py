"""Field equations for the tetrad 1-forms and related pointwise identities.

Curvature signs follow :mod:`operators`: R^a = (d^d) theta^a, R = R^a_a,
G^a = R^a - R theta^a / 2. A geometry is read as an exact solution whose
source is T^a_b := G^a_b (natural units, coupling 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import Multivector, dx, theta, theta_lower
from .connection import Connection, Flavor, nabla_minus_q
from .geometry import MetricField
from .operators import Operators, _vec
from .symexpr import ZERO, Expr, add_all, diff


class DimensionError(ValueError):
    """Identity is specific to four dimensions."""


# ------------------------------------------------------------ sources

@dataclass(frozen=True)
class EnergyMomentum:
    components: tuple  # T^a_b
    one_forms: tuple   # T^a = T^a_b theta^b
    trace: Expr


def energy_momentum(cf, components) -> EnergyMomentum:
    """Wrap a T^a_b matrix of expressions or numbers."""
    from .clifford import algebra_of
    from .symexpr import _coerce
    n = cf.dim
    comps = tuple(tuple(_coerce(components[a][b]) for b in range(n)) for a in range(n))
    alg = algebra_of(cf)
    forms = tuple(Multivector(alg, _vec(alg, comps[a]), cf) for a in range(n))
    return EnergyMomentum(comps, forms, add_all(comps[a][a] for a in range(n)))


def einstein_tensor_from_geometry(ops: Operators) -> EnergyMomentum:
    """T^a_b := R^a_b - delta^a_b R / 2."""
    f = ops.forms
    n = ops.n
    comps = [[f.ricci_components[a][b] - (0.5 * f.scalar if a == b else 0.0) for b in range(n)]
             for a in range(n)]
    return energy_momentum(ops.cf, comps)


def einstein_one_form_residual(ops: Operators, T: EnergyMomentum) -> list:
    """R^a - R theta^a / 2 - T^a for each a."""
    f = ops.forms
    return [f.einstein[a] - T.one_forms[a] for a in range(ops.n)]


def tetrad_field_eq_residual(ops: Operators, T: EnergyMomentum) -> list:
    """-(box)theta^a + d^(d.theta^a) + d_|(d^theta^a) - (T^a - T theta^a / 2), per a.

    The divergence and curl are the covariant contractions theta^b _| nabla_b
    and theta^b ^ nabla_b, independent of the d and delta routines.
    """
    calc = ops.calc
    n = ops.n
    out = []
    for a in range(n):
        th = theta(ops.cf, a)
        div = -calc.delta_covariant(th)      # d . theta^a
        curl = calc.d_covariant(th)          # d ^ theta^a
        lhs = -ops.box(th) + calc.d_covariant(div) - calc.delta_covariant(curl)
        rhs = T.one_forms[a] - th.scale(0.5 * T.trace)
        out.append(lhs - rhs)
    return out


@dataclass
class CoordinateFieldEq:
    einstein: list   # R^mu - R dx^mu / 2 - T^mu
    harmonic: list   # box dx^mu + R dx^mu / 2 + T^mu
    gauge: list      # delta dx^mu, scalars


def coordinate_coframe_field_eq(ops: Operators, T: EnergyMomentum) -> CoordinateFieldEq:
    """Field equations written for the coordinate 1-forms dx^mu."""
    cf, n = ops.cf, ops.n
    R = ops.forms.scalar
    ein, harm, gauge = [], [], []
    for mu in range(n):
        x = dx(cf, mu)
        Tmu = ops.calc._sum(T.one_forms[a].scale(cf.qinv[a][mu]) for a in range(n)
                            if not cf.qinv[a][mu].is_zero)
        ric = ops.ricci_operator(x)
        ein.append(ric - x.scale(0.5 * R) - Tmu)
        harm.append(ops.box(x) + x.scale(0.5 * R) + Tmu)
        gauge.append(ops.calc.delta(x).scalar_part())
    return CoordinateFieldEq(ein, harm, gauge)


# ------------------------------------------------------------ q-function equations

def _gamma_trace(ops: Operators) -> list:
    """g^{mn} Gamma^r_{mn}."""
    n, gi, G = ops.n, ops.metric.ginv, ops.conn.gamma
    return [add_all(gi[m][v] * G[r][m][v] for m in range(n) for v in range(n)
                    if not gi[m][v].is_zero) for r in range(n)]


def _laplace_minus(ops: Operators) -> list:
    """L^b_mu = g^{ab}(d_a V^b_{b mu} - Gamma^s_{a mu} V^b_{b s}), V = nabla- q."""
    cf, n, gi, G = ops.cf, ops.n, ops.metric.ginv, ops.conn.gamma
    V = nabla_minus_q(cf, ops.conn)
    out = []
    for b in range(n):
        row = []
        for mu in range(n):
            terms = []
            for al in range(n):
                for be in range(n):
                    if gi[al][be].is_zero:
                        continue
                    inner = diff(V[b][be][mu], al) - add_all(G[s][al][mu] * V[b][be][s]
                                                             for s in range(n))
                    terms.append(gi[al][be] * inner)
            row.append(add_all(terms))
        out.append(row)
    return out


def _k_matrix(ops: Operators, P, Rmix) -> list:
    """K^b_a = -[P^b_a - R^b_a - g^{mn} Gamma^r_{mn} omega^b_{ra}]."""
    n, om = ops.n, ops.conn.omega
    gt = _gamma_trace(ops)
    return [[-(P[b][a] - Rmix[b][a] - add_all(gt[r] * om[b][r][a] for r in range(n)))
             for a in range(n)] for b in range(n)]


def _ricci_from_source(ops: Operators, T: EnergyMomentum):
    n = ops.n
    if n == 2:
        # two dimensions: no trace reversal; use the geometric Ricci directly
        return ops.forms.ricci_components
    return [[T.components[b][a] - (T.trace / (n - 2) if a == b else 0.0) for a in range(n)]
            for b in range(n)]


def q_wave_eq_gr(ops: Operators, T: EnergyMomentum) -> list:
    """Residual of g^{ab} nabla-_a nabla-_b q^b_mu + K^b_a q^a_mu = 0 (b, mu flattened).

    P^b_a are the components of d^2 theta^b = -(d delta + delta d) theta^b.
    """
    n, q = ops.n, ops.cf.q
    P = [[ops.hodge_laplacian(theta(ops.cf, b))[a] for a in range(n)] for b in range(n)]
    K = _k_matrix(ops, P, _ricci_from_source(ops, T))
    L = _laplace_minus(ops)
    return [L[b][mu] + add_all(K[b][a] * q[a][mu] for a in range(n))
            for b in range(n) for mu in range(n)]


def constraint_l4(ops: Operators, T: EnergyMomentum) -> list:
    """K^b_a - g^{ab}(d_a w^b_{ba} + w^b_{ad} w^d_{ba} - 2 w^b_{bd} w^d_{aa}), flattened.

    Here P comes from the connection 1-form route for box theta^b plus R^b_a,
    so the check ties that route to the q-equation.
    """
    n, gi, om = ops.n, ops.metric.ginv, ops.conn.omega
    P = []
    Rmix = _ricci_from_source(ops, T)
    for b in range(n):
        box, _ = ops.connection_route(b)
        P.append([box[a] + Rmix[b][a] for a in range(n)])
    K = _k_matrix(ops, P, Rmix)
    out = []
    for b in range(n):
        for a in range(n):
            terms = []
            for al in range(n):
                for be in range(n):
                    if gi[al][be].is_zero:
                        continue
                    s = diff(om[b][be][a], al)
                    s = s + add_all(om[b][al][d] * om[d][be][a] for d in range(n))
                    s = s - 2.0 * add_all(om[b][be][d] * om[d][al][a] for d in range(n))
                    terms.append(gi[al][be] * s)
            out.append(K[b][a] - add_all(terms))
    return out


# ------------------------------------------------------------ the incorrect equations

@dataclass
class EvansResiduals:
    eq49E: list   # box q^a_mu - R q^a_mu
    eq2E: list    # (box + T) q^a_mu


def flat_box(metric: MetricField, f: Expr) -> Expr:
    """g^{mn} d_m d_n f on a scalar function, with no connection terms."""
    n, gi = metric.dim, metric.ginv
    return add_all(gi[m][v] * diff(diff(f, m), v) for m in range(n) for v in range(n)
                   if not gi[m][v].is_zero)


def evans_residuals(ops: Operators, T: EnergyMomentum | None = None) -> EvansResiduals:
    n, q = ops.n, ops.cf.q
    R = ops.forms.scalar
    tr = (T if T is not None else einstein_tensor_from_geometry(ops)).trace
    e49, e2 = [], []
    for a in range(n):
        for mu in range(n):
            b = flat_box(ops.metric, q[a][mu])
            e49.append(b - R * q[a][mu])
            e2.append(b + tr * q[a][mu])
    return EvansResiduals(e49, e2)


# ------------------------------------------------------------ Maxwell

@dataclass
class MaxwellForms:
    dF: Multivector
    deltaF: Multivector
    diracF: Multivector

    @property
    def split_residual(self) -> Multivector:
        return self.diracF - (self.dF - self.deltaF)


def maxwell(ops: Operators, F: Multivector) -> MaxwellForms:
    c = ops.calc
    return MaxwellForms(c.d(F), c.delta(F), c.dirac(F))


@dataclass
class PotentialResidual:
    components: list      # per mu: (d^2 A)_mu - [g nabla nabla A_mu + R^n_mu A_n]
    gauge: Expr           # delta A
    curvature_term: list  # R^n_mu A_n


def maxwell_potential_residual(ops: Operators, A: Multivector) -> PotentialResidual:
    """Coordinate-component check of d^2 A against the covariant wave operator plus Ricci."""
    from .clifford import to_coordinate
    cf, n, gi, G = ops.cf, ops.n, ops.metric.ginv, ops.conn.gamma
    lap = to_coordinate(ops.hodge_laplacian(A), cf)
    Ac = to_coordinate(A, cf)
    Amu = [Ac[1 << m] for m in range(n)]
    # nabla_a A_m = d_a A_m - Gamma^s_{am} A_s
    D1 = [[diff(Amu[m], a) - add_all(G[s][a][m] * Amu[s] for s in range(n)) for m in range(n)]
          for a in range(n)]
    ric = _coordinate_ricci_mixed(ops)
    comps, rterm = [], []
    for m in range(n):
        terms = []
        for a in range(n):
            for b in range(n):
                if gi[a][b].is_zero:
                    continue
                # nabla_a nabla_b A_m
                t = (diff(D1[b][m], a) - add_all(G[s][a][b] * D1[s][m] for s in range(n))
                     - add_all(G[s][a][m] * D1[b][s] for s in range(n)))
                terms.append(gi[a][b] * t)
        rt = add_all(ric[v][m] * Amu[v] for v in range(n))
        rterm.append(rt)
        comps.append(lap[1 << m] - (add_all(terms) + rt))
    return PotentialResidual(comps, ops.calc.delta(A).scalar_part(), rterm)


def _coordinate_ricci_mixed(ops: Operators) -> list:
    """R^n_m in coordinates, operator sign: q_a^n R^a_b q^b_m."""
    n, cf = ops.n, ops.cf
    Rf = ops.forms.ricci_components
    return [[add_all(cf.qinv[a][v] * Rf[a][b] * cf.q[b][m] for a in range(n) for b in range(n))
             for m in range(n)] for v in range(n)]


# ------------------------------------------------------------ Lagrangian identities

def _require_4d(ops: Operators):
    if ops.n != 4:
        raise DimensionError(f"Lagrangian identities need dimension 4, got {ops.n}")


def connection_one_forms(ops: Operators, cartan: bool = False) -> list:
    """w[c][d] = omega^{cd} as 1-forms.

    By default the sign is the one for which R_cd = d w_cd + w_ca ^ w_d^a holds
    with the operator curvature two[c][d]. ``cartan=True`` gives the usual
    Cartan forms, d theta^a = -omega^a_b ^ theta^b, which are minus these.
    """
    n, eta, w = ops.n, ops.cf.eta, ops.w
    alg = ops.alg
    s = 1.0 if cartan else -1.0
    return [[Multivector(alg, _vec(alg, [s * eta[d] * w[c][b][d] for b in range(n)]), ops.cf)
             for d in range(n)] for c in range(n)]


def omega_from_dtheta(ops: Operators) -> list:
    """Cartan omega^{cd} = 1/2[theta^d _| d theta^c - theta^c _| d theta^d + theta^c _| (theta^d _| d theta_a) theta^a]."""
    cf, n, calc = ops.cf, ops.n, ops.calc
    th = [theta(cf, a) for a in range(n)]
    dth = [calc.d(t) for t in th]
    dlow = [dth[a].scale(float(cf.eta[a])) for a in range(n)]
    out = []
    for c in range(n):
        row = []
        for d in range(n):
            acc = th[d].lc(dth[c]) - th[c].lc(dth[d])
            for a in range(n):
                acc = acc + th[a].scale(th[c].lc(th[d].lc(dlow[a])).scalar_part())
            row.append(acc.scale(0.5))
        out.append(row)
    return out


@dataclass
class LagrangianReport:
    """Pointwise residuals of the first-order Lagrangian identities (4D).

    ``l_eh`` is R tau / 2 with the operator-sign scalar, so the usual
    Einstein-Hilbert density is ``-l_eh``.
    """
    l_eh: Expr
    l_eh_forms: Expr           # R_cd ^ star(theta^c ^ theta^d) / 2, same sign as l_eh
    exact_term: Expr           # -d(theta^a ^ star d theta_a)
    lg_terms: tuple            # the three quadratic terms of L_g
    scalar_chain: Expr         # -theta^c _| (theta^d _| R_cd) - R
    structure: list            # d w_cd + w_ca ^ w_d^a - R_cd
    expansion: Expr            # theta^c _| theta^d _| (R_cd - d w_cd - w_ca ^ w_d^a)
    omega_residuals: list      # omega_from_dtheta minus Cartan forms
    dual_chain: Expr           # star[th^c _| th^d _| d w_cd] + 2 d(th^a ^ star d th_a) + w_cd ^ d star th^cd
    dual_chain_dropped: Expr   # same identity without the w ^ d star term; nonzero in general
    quadratic_chain: Expr      # theta^a _| theta^b _| (w_ac ^ w_b^c) against its component form
    einstein_dual: list        # -1/2 star(theta^c ^ theta^d ^ theta_a) ^ R_cd - star G_a

    @property
    def l_g(self) -> Expr:
        return add_all(self.lg_terms)

    @property
    def eh_split_residual(self) -> Expr:
        """Usual-sign L_EH minus (exact term + L_g)."""
        return -self.l_eh - (self.exact_term + self.l_g)


def _top(A: Multivector) -> Expr:
    return A.comps[-1]


def lagrangian_identities(ops: Operators) -> LagrangianReport:
    _require_4d(ops)
    cf, n, calc, eta = ops.cf, ops.n, ops.calc, ops.cf.eta
    f = ops.forms
    th = [theta(cf, a) for a in range(n)]
    low = [theta_lower(cf, a) for a in range(n)]
    vol = th[0].volume()
    R = f.scalar
    l_eh = _top(vol.scale(0.5 * R))
    two_low = [[f.two[c][d].scale(float(eta[c] * eta[d])) for d in range(n)] for c in range(n)]
    l_eh_forms = _top(calc._sum(two_low[c][d].wedge(th[c].wedge(th[d]).hodge())
                                for c in range(n) for d in range(n) if c != d).scale(0.5))
    dth = [calc.d(t) for t in th]
    dlow = [dth[a].scale(float(eta[a])) for a in range(n)]
    delth = [calc.delta(t) for t in th]
    exact = -calc.d(calc._sum(th[a].wedge(dlow[a].hodge()) for a in range(n)))
    t1 = calc._sum(dth[a].wedge(dlow[a].hodge()) for a in range(n)).scale(-0.5)
    t2 = calc._sum(delth[a].wedge(delth[a].scale(float(eta[a])).hodge())
                   for a in range(n)).scale(0.5)
    X = calc._sum(dth[a].wedge(low[a]) for a in range(n))
    t3 = X.wedge(X.hodge()).scale(0.25)
    chain = -calc._sum(th[c].lc(th[d].lc(two_low[c][d])) for c in range(n) for d in range(n))

    wr = omega_from_dtheta(ops)
    wcart = connection_one_forms(ops, cartan=True)
    om_res = [wr[c][d] - wcart[c][d] for c in range(n) for d in range(n)]

    wc = connection_one_forms(ops)
    wlow = [[wc[c][d].scale(float(eta[c] * eta[d])) for d in range(n)] for c in range(n)]
    dw = [[calc.d(wlow[c][d]) for d in range(n)] for c in range(n)]
    ww = [[calc._sum(wlow[c][a].wedge(wlow[d][a].scale(float(eta[a]))) for a in range(n))
           for d in range(n)] for c in range(n)]
    structure = [dw[c][d] + ww[c][d] - two_low[c][d] for c in range(n) for d in range(n)]
    expansion = calc._sum(th[c].lc(th[d].lc(two_low[c][d] - dw[c][d] - ww[c][d]))
                          for c in range(n) for d in range(n)).scalar_part()

    dual = calc._sum(th[c].lc(th[d].lc(dw[c][d])) for c in range(n) for d in range(n)).hodge()
    extra = calc._sum(wlow[c][d].wedge(calc.d(th[c].wedge(th[d]).hodge()))
                      for c in range(n) for d in range(n) if c != d)
    dual_chain = _top(dual) - 2.0 * _top(exact) + _top(extra)
    dual_dropped = _top(dual) - 2.0 * _top(exact)

    quad_val = calc._sum(th[a].lc(th[b].lc(wlow[a][c].wedge(wc[b][c].scale(float(eta[b])))))
                         for a in range(n) for b in range(n) for c in range(n)).scalar_part()
    # w^a_{bc} from w^a_b = w^a_{bc} theta^c
    W = [[[wc[a][b][(c,)] * eta[b] for c in range(n)] for b in range(n)] for a in range(n)]
    comp = add_all(eta[b] * (W[d][b][c] * W[c][d][b] - W[d][c][d] * W[c][b][b])
                   for b in range(n) for c in range(n) for d in range(n))

    ein_dual = []
    for a in range(n):
        s = calc._sum(th[c].wedge(th[d]).wedge(low[a]).hodge().wedge(two_low[c][d])
                      for c in range(n) for d in range(n) if c != d).scale(-0.5)
        ein_dual.append(s - f.einstein[a].scale(float(eta[a])).hodge())
    return LagrangianReport(
        l_eh=l_eh, l_eh_forms=l_eh_forms, exact_term=_top(exact),
        lg_terms=(_top(t1), _top(t2), _top(t3)),
        scalar_chain=chain.scalar_part() - R, structure=structure, expansion=expansion,
        omega_residuals=om_res, dual_chain=dual_chain, dual_chain_dropped=dual_dropped,
        quadratic_chain=quad_val + comp, einstein_dual=ein_dual)


@dataclass
class EulerLagrange:
    el_forms: list          # dL/dtheta^a + d(dL/d dtheta^a), 3-forms, index raised
    superpotential: list    # star S^c, 2-forms (Cartan connection)
    pseudo_t: list          # star t^c, 3-forms
    target: list            # -star G^a with usual-sign curvature

    @property
    def algebraic_residuals(self) -> list:
        return [e - t for e, t in zip(self.el_forms, self.target)]

    @property
    def superpotential_residuals(self) -> list:
        """star t^c + d star S^c - target."""
        return [self._sp[c] - self.target[c] for c in range(len(self.target))]

    _sp: list = field(default_factory=list)


def euler_lagrange_forms(ops: Operators) -> EulerLagrange:
    _require_4d(ops)
    cf, n, calc, eta = ops.cf, ops.n, ops.calc, ops.cf.eta
    th = [theta(cf, a) for a in range(n)]
    low = [theta_lower(cf, a) for a in range(n)]
    dth = [calc.d(t) for t in th]
    dlow = [dth[a].scale(float(eta[a])) for a in range(n)]
    sdl = [d.hodge() for d in dlow]                      # star d theta_a
    st = [t.hodge() for t in th]                         # star theta^a
    sdsl = [calc.d(low[a].hodge()).hodge() for a in range(n)]   # star d star theta_a
    X = calc._sum(dth[a].wedge(low[a]) for a in range(n))
    sX = X.hodge()
    el = []
    for d_ in range(n):
        ld = low[d_]
        t = []
        t += [ld.lc(dth[a]).wedge(sdl[a]).scale(0.5) for a in range(n)]
        t += [-dth[a].wedge(ld.lc(sdl[a])).scale(0.5) for a in range(n)]
        # coefficient 1 here; 1/2 fails the finite-difference oracle
        t += [calc.d(ld.lc(st[a])).wedge(sdsl[a]) for a in range(n)]
        t += [ld.lc(calc.d(st[a])).wedge(sdsl[a]).scale(0.5) for a in range(n)]
        t.append(dlow[d_].wedge(sX).scale(0.5))
        t.append(-X.wedge(ld.lc(sX)).scale(0.25))
        t.append(-ld.lc(X).wedge(sX).scale(0.25))
        dL_dth = calc._sum(t)
        dL_ddth = (-sdl[d_] - calc._sum(ld.lc(st[a]).wedge(sdsl[a]) for a in range(n))
                   + ld.wedge(sX).scale(0.5))
        el.append(dL_dth + calc.d(dL_ddth))
    # raise the free index so el[a] pairs with star G^a
    el = [el[a].scale(float(eta[a])) for a in range(n)]
    # operator-sign G is minus the usual one
    target = [ops.forms.einstein[a].hodge() for a in range(n)]
    w = connection_one_forms(ops, cartan=True)
    wlow = [[w[a][b].scale(float(eta[a] * eta[b])) for b in range(n)] for a in range(n)]
    wmix = [[w[c][d].scale(float(eta[d])) for d in range(n)] for c in range(n)]  # w^c_d
    sS, st_c, sp = [], [], []
    for c in range(n):
        s = calc._sum(wlow[a][b].wedge(th[a].wedge(th[b]).wedge(th[c]).hodge())
                      for a in range(n) for b in range(n) if a != b).scale(0.5)
        tt = []
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                for d in range(n):
                    tt.append(wlow[a][b].wedge(wmix[c][d].wedge(
                        th[a].wedge(th[b]).wedge(th[d]).hodge())))
                    tt.append(wlow[a][b].wedge(wmix[b][d].wedge(
                        th[a].wedge(th[d]).wedge(th[c]).hodge())))
        tc = calc._sum(tt).scale(-0.5)
        sS.append(s)
        st_c.append(tc)
        sp.append(tc + calc.d(s))
    out = EulerLagrange(el, sS, st_c, target)
    out._sp = sp
    return out


# ------------------------------------------------------------ constrained variations

def _blade_derivation(alg, blade_idx, dtheta) -> np.ndarray:
    """d/de of theta^{i1} ^ ... ^ theta^{ik} under theta^i -> theta^i + e dtheta^i (numeric)."""
    out = np.zeros(alg.size)
    for j in range(len(blade_idx)):
        acc = np.zeros(alg.size)
        acc[0] = 1.0
        for k, i in enumerate(blade_idx):
            factor = dtheta[i] if k == j else _unit(alg, i)
            acc = _wedge_num(alg, acc, factor)
        out += acc
    return out


def _unit(alg, i):
    v = np.zeros(alg.size)
    v[1 << i] = 1.0
    return v


def _wedge_num(alg, a, b):
    out = np.zeros(alg.size)
    for x in np.nonzero(a)[0]:
        for y in np.nonzero(b)[0]:
            if x & y:
                continue
            out[x ^ y] += alg.sign[x][y] * a[x] * b[y]
    return out


def variation_checks(eta, chi, phi_comps) -> dict:
    """Directional derivative of star along theta -> theta + e chi theta, two ways.

    Returns max-abs residuals of the commutator formula and of the
    blade formula delta star(theta^I) = delta theta_c ^ star(theta^I ^ theta^c).
    ``chi`` must be antisymmetric with lowered indices; ``phi_comps`` a length-2^n vector.
    """
    from .clifford import Algebra, blade_indices
    alg = Algebra(eta)
    n = alg.dim
    # delta theta^a = eta^a chi_{ad} theta^d
    dth = [np.zeros(alg.size) for _ in range(n)]
    for a in range(n):
        for d in range(n):
            dth[a][1 << d] = eta[a] * chi[a][d]
    phi = Multivector(alg, list(phi_comps))
    dthm = [Multivector(alg, list(v)) for v in dth]
    low = [Multivector.blade(alg, (a,), float(eta[a])) for a in range(n)]

    def deriv(mv: Multivector) -> np.ndarray:
        out = np.zeros(alg.size)
        for m, c in enumerate(mv.comps):
            if c.is_zero:
                continue
            out += c.val * _blade_derivation(alg, blade_indices(m), dth)
        return out

    def num(mv):
        return np.array([c.val for c in mv.comps])

    star_phi = phi.hodge()
    # delta(star phi) as a function of the thetas, and star(delta phi)
    lhs = deriv(star_phi) - num(Multivector(alg, list(deriv(phi))).hodge())
    rhs = (num(_sum_mv(alg, [dthm[a].wedge(low[a].lc(star_phi)) for a in range(n)]))
           - num(_sum_mv(alg, [dthm[a].wedge(low[a].lc(phi)) for a in range(n)]).hodge()))
    commutator = float(np.max(np.abs(lhs - rhs)))
    worst = 0.0
    for m in range(alg.size):
        idx = blade_indices(m)
        if not idx:
            continue
        b = Multivector.blade(alg, idx)
        lhs_b = deriv(b.hodge())
        dtl = [Multivector(alg, list(v)).scale(float(eta[c])) for c, v in enumerate(dth)]
        # delta theta_c = eta_c delta theta^c; wedge with star(theta^I ^ theta^c), theta^c upper
        r1 = _sum_mv(alg, [dtl[c].wedge(b.wedge(Multivector.blade(alg, (c,))).hodge())
                           for c in range(n)])
        r2 = _sum_mv(alg, [dtl[c].wedge(Multivector.blade(alg, (c,)).lc(b.hodge()))
                           for c in range(n)])
        worst = max(worst, float(np.max(np.abs(lhs_b - num(r1)))),
                    float(np.max(np.abs(lhs_b - num(r2)))))
    return {"commutator": commutator, "blade": worst}


def _sum_mv(alg, items):
    out = Multivector.zero(alg)
    for it in items:
        out = out + it
    return out


__all__ = [
    "DimensionError", "EnergyMomentum", "energy_momentum", "einstein_tensor_from_geometry",
    "einstein_one_form_residual", "tetrad_field_eq_residual", "CoordinateFieldEq",
    "coordinate_coframe_field_eq", "q_wave_eq_gr", "constraint_l4", "EvansResiduals",
    "evans_residuals", "flat_box", "MaxwellForms", "maxwell", "PotentialResidual",
    "maxwell_potential_residual", "connection_one_forms", "omega_from_dtheta",
    "LagrangianReport", "lagrangian_identities", "EulerLagrange", "euler_lagrange_forms",
    "variation_checks",
]
