"""Square of the Dirac operator and its pieces.

Sign convention: the Ricci 1-forms are *defined* by R^a = (d^d)theta^a with
the Clifford calculus of :mod:`clifford`. Relative to the usual Riemann
tensor (``connection.curvature``) this gives R^a_b = -Ric^a_b, so the
scalar R = R^a_a is minus the usual scalar curvature. The unit sphere has
R^1_1 = -1 here.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .clifford import (CliffordCalculus, Multivector, algebra_of, blade_indices, theta,
                       theta_lower)
from .connection import (Connection, Flavor, FlavorError, curvature, structure_coefficients)
from .geometry import MetricField, permutation_sign
from .symexpr import ZERO, Expr, add_all


class GradeError(ValueError):
    """Operation needs a homogeneous multivector."""


# ------------------------------------------------------------ frame coefficients

@dataclass(frozen=True)
class FrameCoefficients:
    """gamma[r][a][b] with nabla_{e_a} e_b = gamma^r_{ab} e_r, plus b and c built from it."""

    gamma: tuple
    b: tuple
    c: tuple
    basis: str


def frame_coefficients(conn: Connection, basis: str = "orthonormal") -> FrameCoefficients:
    """Connection coefficients in the orthonormal or the coordinate frame.

    ``c`` is the true structure coefficient set of the frame (zero for a
    coordinate frame); for torsion-free connections it equals gamma - gamma^T.
    """
    n = conn.dim
    if basis == "orthonormal":
        gam = conn.frame_omega()
        c = structure_coefficients(conn.coframe)
    elif basis == "coordinate":
        gam = conn.gamma
        c = tuple(tuple(tuple(ZERO for _ in range(n)) for _ in range(n)) for _ in range(n))
    else:
        raise ValueError(f"unknown basis {basis!r}")
    b = tuple(tuple(tuple(gam[r][a][s] + gam[r][s][a] for s in range(n)) for a in range(n))
              for r in range(n))
    return FrameCoefficients(gam, b, c, basis)


def antisymmetry_residuals(fc: FrameCoefficients) -> list:
    """c^r_{ab} - (gamma^r_{ab} - gamma^r_{ba}), zero for a torsion-free connection."""
    n = len(fc.gamma)
    return [fc.c[r][a][b] - (fc.gamma[r][a][b] - fc.gamma[r][b][a])
            for r in range(n) for a in range(n) for b in range(n)]


# ------------------------------------------------------------ curvature forms

@dataclass(frozen=True)
class CurvatureForms:
    """ricci[a] = R^a (1-form); two[r][s] = R^{rs} (2-form); einstein[a] = G^a; scalar R."""

    ricci: tuple
    two: tuple
    einstein: tuple
    scalar: Expr
    ricci_components: tuple


def curvature_forms(conn: Connection, metric: MetricField) -> CurvatureForms:
    """Curvature forms from the coordinate Riemann tensor, in the Ricci-operator sign."""
    cf = conn.coframe
    n = cf.dim
    eta = cf.eta
    alg = algebra_of(cf)
    cur = curvature(conn, metric)
    fr = cur.frame_riemann  # R^a_{bcd}, usual sign
    # R^a_b = -Ric^a_b, the sign fixed by (d^d)theta^a = R^a
    comps = tuple(tuple(-cur.frame_ricci[a][b] for b in range(n)) for a in range(n))
    scalar = add_all(comps[a][a] for a in range(n))
    ricci = tuple(Multivector(alg, _vec(alg, comps[a]), cf) for a in range(n))
    two = []
    for r in range(n):
        row = []
        for s in range(n):
            # R^{rs} = 1/2 R^{rs}_{cd} theta^c ^ theta^d, curvature 2-form of the same sign
            out = [ZERO] * alg.size
            for c in range(n):
                for d in range(c + 1, n):
                    out[(1 << c) | (1 << d)] = -eta[s] * fr[r][s][c][d]
            row.append(Multivector(alg, out, cf))
        two.append(tuple(row))
    einstein = tuple(ricci[a] - theta(cf, a).scale(0.5 * scalar) for a in range(n))
    return CurvatureForms(ricci, tuple(two), einstein, scalar, comps)


def _vec(alg, coeffs):
    out = [ZERO] * alg.size
    for i, c in enumerate(coeffs):
        out[1 << i] = c
    return out


# ------------------------------------------------------------ operators

class Operators:
    """Second-order operators for a Levi-Civita connection."""

    def __init__(self, conn: Connection, metric: MetricField | None = None, check_points=None):
        conn.require(Flavor.LEVI_CIVITA)
        self.conn = conn
        self.cf = conn.coframe
        self.metric = metric
        self.calc = CliffordCalculus(conn, check_points)
        self.alg = self.calc.alg
        self.n = self.cf.dim
        self.w = self.calc.w
        self._forms = None

    @property
    def forms(self) -> CurvatureForms:
        if self._forms is None:
            if self.metric is None:
                from .geometry import metric_from_coframe
                self.metric = metric_from_coframe(self.cf)
            self._forms = curvature_forms(self.conn, self.metric)
        return self._forms

    # -- building blocks
    def _first(self, A):
        return [self.calc.nabla(a, A) for a in range(self.n)]

    def _second(self, A):
        """N[a][b] = nabla_a nabla_b A - omega^c_{ab} nabla_c A."""
        first = self._first(A)
        out = []
        for a in range(self.n):
            row = []
            for b in range(self.n):
                t = self.calc.nabla(a, first[b])
                corr = [first[c].scale(self.w[c][a][b]) for c in range(self.n)
                        if not self.w[c][a][b].is_zero]
                row.append(t - self.calc._sum(corr) if corr else t)
            out.append(row)
        return out

    # -- orthonormal-frame forms
    def dirac(self, A):
        return self.calc.dirac(A)

    def dirac_squared(self, A):
        return self.calc.dirac(self.calc.dirac(A))

    def hodge_laplacian(self, A):
        """-(d delta + delta d) A."""
        c = self.calc
        return -(c.d(c.delta(A)) + c.delta(c.d(A)))

    def box(self, A):
        """Covariant D'Alembertian eta^{ab}(nabla_a nabla_b - omega^c_{ab} nabla_c)."""
        N = self._second(A)
        return self.calc._sum(N[a][a].scale(float(self.cf.eta[a])) for a in range(self.n))

    def ricci_operator(self, A):
        """theta^a ^ theta^b (nabla_a nabla_b - omega^c_{ab} nabla_c), Clifford-multiplied."""
        N = self._second(A)
        terms = []
        for a in range(self.n):
            for b in range(self.n):
                if a != b:
                    terms.append(Multivector.blade(self.alg, (a, b), 1.0, self.cf).gp(N[a][b]))
        return self.calc._sum(terms)

    def box_and_ricci(self, A):
        N = self._second(A)
        box = self.calc._sum(N[a][a].scale(float(self.cf.eta[a])) for a in range(self.n))
        ric = self.calc._sum(Multivector.blade(self.alg, (a, b), 1.0, self.cf).gp(N[a][b])
                             for a in range(self.n) for b in range(self.n) if a != b)
        return box, ric

    # -- arbitrary-frame forms, exercised with the coordinate frame
    def _coord_nabla(self, mu, A):
        q = self.cf.q
        return self.calc._sum(self.calc.nabla(a, A).scale(q[a][mu]) for a in range(self.n)
                              if not q[a][mu].is_zero)

    def box_coordinate(self, A):
        """g^{ab}(nabla_a nabla_b - gamma^r_{ab} nabla_r) with coordinate directions."""
        n, G = self.n, self.conn.gamma
        if self.metric is None:
            _ = self.forms
        gi = self.metric.ginv
        first = [self._coord_nabla(m, A) for m in range(n)]
        terms = []
        for a in range(n):
            for b in range(n):
                if gi[a][b].is_zero:
                    continue
                t = self._coord_nabla(a, first[b])
                corr = [first[r].scale(G[r][a][b]) for r in range(n) if not G[r][a][b].is_zero]
                if corr:
                    t = t - self.calc._sum(corr)
                terms.append(t.scale(gi[a][b]))
        return self.calc._sum(terms)

    def ricci_coordinate(self, A):
        """1/2 dx^a ^ dx^b [nabla_a nabla_b - nabla_b nabla_a - c^r_{ab} nabla_r], c = 0."""
        from .clifford import dx
        n = self.n
        first = [self._coord_nabla(m, A) for m in range(n)]
        dxs = [dx(self.cf, m) for m in range(n)]
        terms = []
        for a in range(n):
            for b in range(a + 1, n):
                comm = self._coord_nabla(a, first[b]) - self._coord_nabla(b, first[a])
                terms.append(dxs[a].wedge(dxs[b]).gp(comm))
        return self.calc._sum(terms)

    # -- algebraic forms
    def ricci_operator_algebraic(self, A, forms: CurvatureForms | None = None):
        """R^s ^ (theta_s _| A) + R^{rs} ^ (theta_r _| (theta_s _| A))."""
        f = forms or self.forms
        n = self.n
        low = [theta_lower(self.cf, a) for a in range(n)]
        inner = [low[s].lc(A) for s in range(n)]
        terms = [f.ricci[s].wedge(inner[s]) for s in range(n)]
        for r in range(n):
            for s in range(n):
                if r != s:
                    terms.append(f.two[r][s].wedge(low[r].lc(inner[s])))
        return self.calc._sum(terms)

    def curvature_contraction(self, A, forms: CurvatureForms | None = None):
        """R^{rs} ^ theta_r _| theta_s _| A alone."""
        f = forms or self.forms
        low = [theta_lower(self.cf, a) for a in range(self.n)]
        return self.calc._sum(f.two[r][s].wedge(low[r].lc(low[s].lc(A)))
                              for r in range(self.n) for s in range(self.n) if r != s)

    def einstein_operator(self, A, forms: CurvatureForms | None = None):
        """1/2 star^{-1} (R^{rs} ^ theta_r _| theta_s _|) star."""
        return self.curvature_contraction(A.hodge(), forms).hodge_inv().scale(0.5)

    def einstein_operator_alt(self, A, forms: CurvatureForms | None = None):
        """1/2 ((d^d) - R^s _| theta_s ^), using star^{-1}(d^d)star = d^d."""
        return self._ricci_plus_contraction(A, forms, -1.0).scale(0.5)

    def einstein_operator_negated(self, A, forms: CurvatureForms | None = None):
        """-1/2 ((d^d) + R^s _| theta_s ^), the variant with star^{-1}(d^d)star = -(d^d).

        On theta^mu it yields -R/2 theta^mu rather than G^mu; kept as a diagnostic.
        """
        return self._ricci_plus_contraction(A, forms, 1.0).scale(-0.5)

    def _ricci_plus_contraction(self, A, forms, sign):
        f = forms or self.forms
        low = [theta_lower(self.cf, a) for a in range(self.n)]
        extra = self.calc._sum(f.ricci[s].lc(low[s].wedge(A)) for s in range(self.n))
        return self.ricci_operator(A) + extra.scale(sign)

    def einstein_operator_conjugated(self, A, forms: CurvatureForms | None = None):
        """star^{-1}(1/2 [(d^d) - R^s ^ theta_s _|]) star, written without curvature 2-forms."""
        f = forms or self.forms
        low = [theta_lower(self.cf, a) for a in range(self.n)]
        B = A.hodge()
        alg_part = self.calc._sum(f.ricci[s].wedge(low[s].lc(B)) for s in range(self.n))
        return (self.ricci_operator(B) - alg_part).hodge_inv().scale(0.5)

    # -- connection 1-form route for theta^mu
    def connection_route(self, mu: int):
        """(box theta^mu, (d^d) theta^mu) from omega^mu_r = omega^mu_{br} theta^b."""
        n, eta, w, cf = self.n, self.cf.eta, self.w, self.cf
        box_c = [ZERO] * n
        for r in range(n):
            # d.omega^mu_r - omega^s_r . omega^mu_s
            terms = []
            for a in range(n):
                ea = eta[a]
                terms.append(ea * _frame_d(cf, a, w[mu][a][r]))
                terms += [-ea * w[mu][s][r] * w[s][a][a] for s in range(n)]
                terms += [-ea * w[mu][a][s] * w[s][a][r] for s in range(n)]
            box_c[r] = -add_all(terms)
        box = Multivector(self.alg, _vec(self.alg, box_c), cf)
        # omega^mu_r as 1-forms; d computed exactly
        one = [Multivector(self.alg, _vec(self.alg, [w[mu][b][r] for b in range(n)]), cf)
               for r in range(n)]
        th = [theta(cf, r) for r in range(n)]
        terms = []
        for r in range(n):
            # d^omega = theta^a ^ nabla_a omega = d omega for Levi-Civita
            two = self.calc.d(one[r])
            for s in range(n):
                ws = Multivector(self.alg, _vec(self.alg, [w[s][b][r] for b in range(n)]), cf)
                wm = Multivector(self.alg, _vec(self.alg, [w[mu][b][s] for b in range(n)]), cf)
                two = two - ws.wedge(wm)
            terms.append(-two.gp(th[r]))
        return box, self.calc._sum(terms)

    # -- component formulas
    def box_components(self, A):
        """(1/r!) g^{ab} nabla_a nabla_b w_{i1..ir} theta^{i1..ir} with tensor components."""
        r = _homogeneous_grade(A)
        T = _tensor(A, r, self.n)
        D = _tensor_second_trace(self, T, r)
        return _from_tensor(self, D, r)

    def hodge_laplacian_components(self, A):
        """Weitzenboeck expansion of d^2 on an r-form in orthonormal components."""
        r = _homogeneous_grade(A)
        n, eta = self.n, self.cf.eta
        T = _tensor(A, r, n)
        D = _tensor_second_trace(self, T, r)
        cur = curvature(self.conn, self.metric if self.metric else _metric(self))
        fr = cur.frame_riemann
        ric = self.forms.ricci_components  # R^s_a in the operator sign
        out = {}
        for idx in product(range(n), repeat=r):
            terms = [D[idx]]
            for p in range(r):
                for s in range(n):
                    if ric[s][idx[p]].is_zero:
                        continue
                    rest = idx[:p] + idx[p + 1:]
                    # -(-1)^p R^s_{a_p} w_{s a_1..^a_p..}, p counted from 1
                    sgn = -1 if (p + 1) % 2 else 1
                    terms.append(-sgn * ric[s][idx[p]] * T[(s,) + rest])
            for p in range(r):
                for q in range(p + 1, r):
                    rest = tuple(idx[k] for k in range(r) if k not in (p, q))
                    sgn = 1 if (p + q) % 2 == 0 else -1
                    for rho in range(n):
                        for sig in range(n):
                            # R^rho_{a_q}^sig_{a_p}, operator sign like the Ricci term
                            R = -eta[sig] * fr[rho][idx[q]][sig][idx[p]]
                            if R.is_zero:
                                continue
                            terms.append(-2 * sgn * R * T[(rho, sig) + rest])
            out[idx] = add_all(terms)
        return _from_tensor(self, out, r)


def _metric(ops):
    from .geometry import metric_from_coframe
    ops.metric = metric_from_coframe(ops.cf)
    return ops.metric


def _frame_d(cf, a, f):
    from .clifford import frame_vector
    return frame_vector(cf, a, f)


def _homogeneous_grade(A: Multivector) -> int:
    gs = A.grades_present()
    if len(gs) > 1:
        raise GradeError(f"expected a homogeneous form, found grades {gs}")
    return gs[0] if gs else 0


def _tensor(A: Multivector, r: int, n: int) -> dict:
    """Antisymmetric components w_{i1..ir} with A = (1/r!) w_{i..} theta^{i..}."""
    out = {}
    for idx in product(range(n), repeat=r):
        if len(set(idx)) < r:
            out[idx] = ZERO
            continue
        out[idx] = A[idx]
    return out


def _from_tensor(ops, T: dict, r: int) -> Multivector:
    comps = [ZERO] * ops.alg.size
    for m in ops.alg.masks_of_grade(r):
        idx = blade_indices(m)
        terms = []
        for perm in permutations(range(r)):
            key = tuple(idx[i] for i in perm)
            terms.append(permutation_sign(perm) * T[key])
        # (1/r!) sum over orderings onto the ascending blade
        fact = 1
        for k in range(2, r + 1):
            fact *= k
        comps[m] = add_all(terms) / fact if r > 1 else add_all(terms)
    return Multivector(ops.alg, comps, ops.cf)


def _cov(ops, T: dict, r: int, a: int) -> dict:
    """Frame covariant derivative nabla_a of a rank-r covariant tensor."""
    n, w = ops.n, ops.w
    out = {}
    for idx in T:
        terms = [_frame_d(ops.cf, a, T[idx])] if not T[idx].is_zero else []
        for p in range(r):
            for s in range(n):
                g = w[s][a][idx[p]]
                if g.is_zero:
                    continue
                key = idx[:p] + (s,) + idx[p + 1:]
                if not T[key].is_zero:
                    terms.append(-g * T[key])
        out[idx] = add_all(terms)
    return out


def _tensor_second_trace(ops, T: dict, r: int) -> dict:
    """eta^{ab} nabla_a nabla_b T with the derivative slot b covariantly differentiated."""
    n, w, eta = ops.n, ops.w, ops.cf.eta
    first = [_cov(ops, T, r, b) for b in range(n)]
    out = {idx: [] for idx in T}
    for a in range(n):
        # (nabla_a nabla T)_{b i..}: covariant derivative of the rank r+1 tensor (b, i..)
        inner = _cov(ops, first[a], r, a)
        for idx in T:
            terms = [inner[idx]]
            for s in range(n):
                g = w[s][a][a]
                if not g.is_zero and not first[s][idx].is_zero:
                    terms.append(-g * first[s][idx])
            out[idx].append(eta[a] * add_all(terms))
    return {k: add_all(v) for k, v in out.items()}


__all__ = ["FrameCoefficients", "frame_coefficients", "antisymmetry_residuals", "CurvatureForms",
           "curvature_forms", "Operators", "GradeError", "FlavorError"]
