"""Clifford bundle of the cotangent space over an orthonormal coframe.

A multivector stores one component per blade, indexed by bitmask: bit i
set means theta^i is a factor, so mask 0b101 is theta^0 ^ theta^2. Storage
is dense (2^n entries, n <= 4). The generators obey
theta^a theta^b + theta^b theta^a = 2 eta^{ab}.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

from .connection import Connection, Flavor, FlavorError
from .geometry import Coframe, minor_det
from .symexpr import (FUNCTIONS, ONE, ZERO, Evaluator, Expr, ParseError, _coerce, _func, _Parser, add_all,
                      diff, to_str)


class FrameMismatchError(ValueError):
    """Operands live over different coframes."""


# ------------------------------------------------------------ blade algebra

def grade_of(mask: int) -> int:
    return bin(mask).count("1")


def blade_mask(indices) -> tuple:
    """Mask and reordering sign of theta^{i1} ^ theta^{i2} ^ ... (0 if an index repeats)."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, 0
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    mask = 0
    for i in idx:
        mask |= 1 << i
    return mask, sign


def blade_indices(mask: int) -> tuple:
    mask = int(mask)
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of blade b past those of blade a."""
    a >>= 1
    swaps = 0
    while a:
        swaps += grade_of(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _tables(eta: tuple):
    n = len(eta)
    size = 1 << n
    sign = [[0] * size for _ in range(size)]
    for a in range(size):
        for b in range(size):
            s = _reorder_sign(a, b)
            common = a & b
            for i in range(n):
                if common >> i & 1:
                    s *= eta[i]
            sign[a][b] = s
    grades = [grade_of(m) for m in range(size)]
    return sign, grades


class Algebra:
    """Clifford algebra of a diagonal signature."""

    _cache: dict = {}

    def __new__(cls, eta):
        eta = tuple(int(e) for e in eta)
        obj = cls._cache.get(eta)
        if obj is None:
            obj = object.__new__(cls)
            obj.eta = eta
            obj.dim = len(eta)
            obj.size = 1 << len(eta)
            obj.sign, obj.grades = _tables(eta)
            cls._cache[eta] = obj
        return obj

    @property
    def pseudoscalar_square(self) -> int:
        top = self.size - 1
        return self.sign[top][top]

    def masks_of_grade(self, k: int) -> list:
        return [m for m in range(self.size) if self.grades[m] == k]


def _as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else _coerce(x)


class Multivector:
    """Section of the Clifford bundle: components over orthonormal blades."""

    __slots__ = ("alg", "frame", "comps")

    def __init__(self, alg: Algebra, comps, frame: Coframe | None = None):
        comps = tuple(_as_expr(c) for c in comps)
        if len(comps) != alg.size:
            raise ValueError(f"expected {alg.size} components, got {len(comps)}")
        self.alg = alg
        self.frame = frame
        self.comps = comps

    # -- construction
    @classmethod
    def zero(cls, alg: Algebra, frame=None) -> "Multivector":
        return cls(alg, (ZERO,) * alg.size, frame)

    @classmethod
    def scalar(cls, alg: Algebra, value, frame=None) -> "Multivector":
        comps = [ZERO] * alg.size
        comps[0] = _as_expr(value)
        return cls(alg, comps, frame)

    @classmethod
    def blade(cls, alg: Algebra, indices, coeff=1.0, frame=None) -> "Multivector":
        for i in indices:
            if not 0 <= i < alg.dim:
                raise ValueError(f"blade index {i} outside 0..{alg.dim - 1}")
        mask, sign = blade_mask(indices)
        comps = [ZERO] * alg.size
        if sign:
            comps[mask] = _as_expr(coeff) * sign
        return cls(alg, comps, frame)

    @classmethod
    def from_dict(cls, alg: Algebra, terms: dict, frame=None) -> "Multivector":
        out = cls.zero(alg, frame)
        for idx, c in terms.items():
            out = out + cls.blade(alg, idx, c, frame)
        return out

    def _new(self, comps) -> "Multivector":
        return Multivector(self.alg, comps, self.frame)

    def _check(self, other: "Multivector"):
        if other.alg is not self.alg:
            raise FrameMismatchError("multivectors of different signatures")
        if self.frame is not None and other.frame is not None and self.frame is not other.frame:
            raise FrameMismatchError("multivectors over different coframes")

    def _frame_of(self, other):
        return self.frame if self.frame is not None else other.frame

    # -- inspection
    def __getitem__(self, indices) -> Expr:
        if isinstance(indices, int):
            indices = (indices,)
        mask, sign = blade_mask(indices)
        return self.comps[mask] * sign if sign else ZERO

    def grade(self, k: int) -> "Multivector":
        g = self.alg.grades
        return self._new([c if g[m] == k else ZERO for m, c in enumerate(self.comps)])

    def grades_present(self) -> list:
        g = self.alg.grades
        return sorted({g[m] for m, c in enumerate(self.comps) if not c.is_zero})

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)

    def scalar_part(self) -> Expr:
        return self.comps[0]

    def terms(self) -> dict:
        return {blade_indices(m): c for m, c in enumerate(self.comps) if not c.is_zero}

    def evaluate(self, ev: Evaluator) -> np.ndarray:
        """Array of shape (2^n, npoints)."""
        return np.array(ev.many(list(self.comps)))

    def __repr__(self):
        parts = []
        for idx, c in self.terms().items():
            blade = "1" if not idx else "e(" + ",".join(map(str, idx)) + ")"
            parts.append(f"({to_str(c, limit=60)})*{blade}")
        return "Multivector(" + (" + ".join(parts) or "0") + ")"

    # -- linear structure
    def __add__(self, other):
        if not isinstance(other, Multivector):
            other = Multivector.scalar(self.alg, other, self.frame)
        self._check(other)
        return Multivector(self.alg, [a + b for a, b in zip(self.comps, other.comps)],
                           self._frame_of(other))

    __radd__ = __add__

    def __neg__(self):
        return self._new([-c for c in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "Multivector":
        s = _as_expr(s)
        return self._new([s * c for c in self.comps])

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return self.gp(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Multivector):
            raise TypeError("division by a multivector is not supported")
        return self._new([c / _as_expr(other) for c in self.comps])

    # -- products
    def _product(self, other: "Multivector", keep) -> "Multivector":
        self._check(other)
        sign, g = self.alg.sign, self.alg.grades
        buckets = [[] for _ in range(self.alg.size)]
        left = [(m, c) for m, c in enumerate(self.comps) if not c.is_zero]
        right = [(m, c) for m, c in enumerate(other.comps) if not c.is_zero]
        for a, ca in left:
            row = sign[a]
            for b, cb in right:
                s = row[b]
                if s == 0 or not keep(a, b, g):
                    continue
                t = ca * cb
                buckets[a ^ b].append(t if s > 0 else -t)
        return Multivector(self.alg, [add_all(t) for t in buckets], self._frame_of(other))

    def gp(self, other: "Multivector") -> "Multivector":
        """Clifford product."""
        return self._product(other, lambda a, b, g: True)

    def wedge(self, other: "Multivector") -> "Multivector":
        return self._product(other, lambda a, b, g: a & b == 0)

    def lc(self, other: "Multivector") -> "Multivector":
        """Left contraction: sum over grades of <A_r B_s>_{s-r}."""
        return self._product(other, lambda a, b, g: a & b == a)

    def rc(self, other: "Multivector") -> "Multivector":
        """Right contraction: sum over grades of <A_r B_s>_{r-s}."""
        return self._product(other, lambda a, b, g: a & b == b)

    def commutator(self, other: "Multivector") -> "Multivector":
        return self.gp(other) - other.gp(self)

    def scalar_product(self, other: "Multivector") -> Expr:
        """A . B = <reverse(A) B>_0: the Gram determinant on equal grades, 0 across grades."""
        self._check(other)
        sign, g = self.alg.sign, self.alg.grades
        terms = []
        for m, (a, b) in enumerate(zip(self.comps, other.comps)):
            if a.is_zero or b.is_zero:
                continue
            k = g[m]
            s = sign[m][m] * (-1 if (k * (k - 1) // 2) % 2 else 1)
            terms.append(a * b if s > 0 else -(a * b))
        return add_all(terms)

    # -- involutions
    def reverse(self) -> "Multivector":
        g = self.alg.grades
        return self._new([-c if (g[m] * (g[m] - 1) // 2) % 2 else c
                          for m, c in enumerate(self.comps)])

    def grade_involution(self) -> "Multivector":
        g = self.alg.grades
        return self._new([-c if g[m] % 2 else c for m, c in enumerate(self.comps)])

    # -- Hodge duality
    def volume(self) -> "Multivector":
        return Multivector.blade(self.alg, range(self.alg.dim), 1.0, self.frame)

    def hodge(self) -> "Multivector":
        """star A = reverse(A) tau, with tau = theta^0 theta^1 ... theta^{n-1}."""
        return self.reverse().gp(self.volume())

    def hodge_inv(self) -> "Multivector":
        """Exact inverse of :meth:`hodge`: reverse(B tau^{-1}), tau^{-1} = tau / tau^2."""
        s = self.alg.pseudoscalar_square
        out = self.gp(self.volume()).reverse()
        return out if s > 0 else -out


def vector(alg: Algebra, coeffs, frame=None) -> Multivector:
    comps = [ZERO] * alg.size
    for i, c in enumerate(coeffs):
        comps[1 << i] = _as_expr(c)
    return Multivector(alg, comps, frame)


def hodge_sign(n: int, p: int, eta) -> int:
    """star star on p-forms equals (-1)^{p(n-p)} sgn(det eta)."""
    s = 1
    for e in eta:
        s *= e
    return (-1) ** (p * (n - p)) * s


# ------------------------------------------------------------ calculus on a coframe

def algebra_of(cf: Coframe) -> Algebra:
    return Algebra(cf.eta)


def frame_vector(cf: Coframe, a: int, f: Expr) -> Expr:
    """e_a(f) = q_a^mu d_mu f."""
    return add_all(cf.qinv[a][m] * diff(f, m) for m in range(cf.dim) if not cf.qinv[a][m].is_zero)


_conv_cache: dict = {}


def _conversions(cf: Coframe):
    """Per grade k: masks, to-coordinate minors of q, from-coordinate minors of q^-1."""
    key = id(cf)
    hit = _conv_cache.get(key)
    if hit is not None and hit[0] is cf:
        return hit[1]
    alg = algebra_of(cf)
    q = [list(r) for r in cf.q]
    qi = [list(r) for r in cf.qinv]
    data = []
    for k in range(cf.dim + 1):
        masks = alg.masks_of_grade(k)
        idx = [blade_indices(m) for m in masks]
        if k == 0:
            to_c = [[ONE]]
            from_c = [[ONE]]
        else:
            to_c = [[minor_det(q, I, J) for J in idx] for I in idx]
            from_c = [[minor_det(qi, I, K) for K in idx] for I in idx]
        data.append((masks, to_c, from_c))
    _conv_cache[key] = (cf, data)
    return data


def to_coordinate(A: Multivector, cf: Coframe) -> dict:
    """Components on coordinate blades dx^J, keyed by mask."""
    out = {}
    for masks, to_c, _ in _conversions(cf):
        for j, J in enumerate(masks):
            out[J] = add_all(A.comps[I] * to_c[i][j] for i, I in enumerate(masks)
                             if not A.comps[I].is_zero and not to_c[i][j].is_zero)
    return out


def from_coordinate(coords: dict, cf: Coframe) -> Multivector:
    alg = algebra_of(cf)
    comps = [ZERO] * alg.size
    for masks, _, from_c in _conversions(cf):
        for i, I in enumerate(masks):
            comps[I] = add_all(coords[K] * from_c[i][k] for k, K in enumerate(masks)
                               if not coords.get(K, ZERO).is_zero and not from_c[i][k].is_zero)
    return Multivector(alg, comps, cf)


def exterior_derivative(A: Multivector, cf: Coframe) -> Multivector:
    """d computed on coordinate components: d(f dx^J) = d_mu f dx^mu ^ dx^J."""
    alg = algebra_of(cf)
    coords = to_coordinate(A, cf)
    buckets = {m: [] for m in range(alg.size)}
    for J, c in coords.items():
        if c.is_zero:
            continue
        for mu in range(cf.dim):
            if J >> mu & 1:
                continue
            dc = diff(c, mu)
            if dc.is_zero:
                continue
            s = alg.sign[1 << mu][J]
            buckets[J | (1 << mu)].append(dc if s > 0 else -dc)
    return from_coordinate({m: add_all(t) for m, t in buckets.items()}, cf)


def codifferential(A: Multivector, cf: Coframe) -> Multivector:
    """delta on p-forms: (-1)^p star^{-1} d star."""
    out = Multivector.zero(A.alg, cf)
    for p in A.grades_present():
        piece = exterior_derivative(A.grade(p).hodge(), cf).hodge_inv()
        out = out + (piece if p % 2 == 0 else -piece)
    return out


def coordinate_form(cf: Coframe, coords: dict) -> Multivector:
    """Build a form from coordinate components {tuple of mu: Expr}."""
    alg = algebra_of(cf)
    comps = {m: ZERO for m in range(alg.size)}
    for idx, c in coords.items():
        mask, sign = blade_mask(idx)
        if sign:
            comps[mask] = comps[mask] + _as_expr(c) * sign
    return from_coordinate(comps, cf)


def dx(cf: Coframe, mu: int) -> Multivector:
    """The coordinate 1-form dx^mu = q_a^mu theta^a."""
    return coordinate_form(cf, {(mu,): 1.0})


def theta(cf: Coframe, a: int) -> Multivector:
    return Multivector.blade(algebra_of(cf), (a,), 1.0, cf)


def theta_lower(cf: Coframe, a: int) -> Multivector:
    """theta_a = eta_ab theta^b."""
    return Multivector.blade(algebra_of(cf), (a,), float(cf.eta[a]), cf)


# ------------------------------------------------------------ covariant derivative

def _require_metric_compatible(conn: Connection, points=None):
    if conn.flavor in (Flavor.LEVI_CIVITA, Flavor.TELEPARALLEL):
        return
    from .connection import omega_antisymmetry_residuals
    from .geometry import sample_points
    pts = points if points is not None else sample_points(conn.coframe.chart, 4, 0)
    ev = Evaluator(pts)
    worst = max(float(np.max(np.abs(v))) for v in ev.many(omega_antisymmetry_residuals(conn)))
    if worst > 1e-9:
        raise FlavorError("Clifford covariant derivative needs a metric-compatible connection "
                          f"(omega_abc + omega_cba reaches {worst:.3g})")


class CliffordCalculus:
    """First-order calculus (nabla, d, delta, Dirac) for one coframe and connection."""

    def __init__(self, conn: Connection, check_points=None):
        _require_metric_compatible(conn, check_points)
        self.conn = conn
        self.cf = conn.coframe
        self.alg = algebra_of(self.cf)
        self.n = self.cf.dim
        self.w = conn.frame_omega()  # w[c][a][b] = omega^c_{ab}
        eta = self.cf.eta
        self.omega2 = []
        for a in range(self.n):
            comps = [ZERO] * self.alg.size
            for b in range(self.n):
                for c in range(b + 1, self.n):
                    # (1/2) omega_{bac} theta^b theta^c summed over ordered pairs
                    val = 0.5 * (eta[b] * self.w[b][a][c] - eta[c] * self.w[c][a][b])
                    comps[(1 << b) | (1 << c)] = val
            self.omega2.append(Multivector(self.alg, comps, self.cf))
        self.thetas = [theta(self.cf, a) for a in range(self.n)]

    def e(self, a: int, A: Multivector) -> Multivector:
        """Frame derivative of the components only."""
        return A._new([frame_vector(self.cf, a, c) if not c.is_zero else ZERO for c in A.comps])

    def nabla(self, a: int, A: Multivector) -> Multivector:
        """nabla_{e_a} A = e_a(A) + 1/2 [omega_a, A]."""
        return self.e(a, A) + self.omega2[a].commutator(A).scale(0.5)

    def dirac(self, A: Multivector) -> Multivector:
        self.conn.require(Flavor.LEVI_CIVITA)
        return self._sum(self.thetas[a].gp(self.nabla(a, A)) for a in range(self.n))

    def d(self, A: Multivector) -> Multivector:
        return exterior_derivative(A, self.cf)

    def delta(self, A: Multivector) -> Multivector:
        return codifferential(A, self.cf)

    def d_covariant(self, A: Multivector) -> Multivector:
        """theta^a ^ nabla_a A, equal to dA for torsion-free connections."""
        return self._sum(self.thetas[a].wedge(self.nabla(a, A)) for a in range(self.n))

    def delta_covariant(self, A: Multivector) -> Multivector:
        """-theta^a _| nabla_a A, equal to delta A for Levi-Civita."""
        return -self._sum(self.thetas[a].lc(self.nabla(a, A)) for a in range(self.n))

    def _sum(self, items) -> Multivector:
        items = list(items)
        comps = [add_all(it.comps[m] for it in items) for m in range(self.alg.size)]
        return Multivector(self.alg, comps, self.cf)


# ------------------------------------------------------------ literals

class _MVParser(_Parser):
    """Grammar of scalar expressions plus the blade constructor e(i, j, ...)."""

    def __init__(self, text, names, constants, alg, frame):
        super().__init__(text, names, constants)
        self.alg = alg
        self.frame = frame

    def _lift(self, x):
        return x if isinstance(x, Multivector) else Multivector.scalar(self.alg, x, self.frame)

    def parse(self):
        out = super().parse()
        return self._lift(out)

    def power(self):
        start = self.pos
        base = self.atom()
        if self.peek() == "^":
            if isinstance(base, Multivector):
                self.error("cannot raise a multivector to a power", start)
            self.pos += 1
            ex = self.unary()
            if isinstance(ex, Multivector):
                self.error("exponent must be a scalar", start)
            try:
                return base ** ex
            except (ValueError, ZeroDivisionError) as err:
                self.error(str(err), start)
        return base

    def term(self):
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            start = self.pos
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                if isinstance(e, Multivector) or isinstance(rhs, Multivector):
                    e = self._lift(e).gp(self._lift(rhs))
                else:
                    e = e * rhs
            else:
                if isinstance(rhs, Multivector):
                    self.error("division by a multivector", start)
                if rhs.is_zero:
                    self.error("division by the constant 0", start)
                e = e / rhs
        return e

    def expr(self):
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            if isinstance(e, Multivector) or isinstance(rhs, Multivector):
                e, rhs = self._lift(e), self._lift(rhs)
            e = e + rhs if op == "+" else e - rhs
        return e

    def identifier(self):
        t, start = self.text, self.pos
        i = start
        while i < len(t) and (t[i].isalnum() or t[i] == "_") and t[i].isascii():
            i += 1
        name = t[start:i]
        self.pos = i
        if self.peek() != "(":
            self.pos = start
            return super().identifier()
        self.pos += 1
        if name == "e":
            return self._blade(start)
        if name not in FUNCTIONS:
            self.error(f"unknown function {name!r}", start, name)
        arg = self.expr()
        self.expect(")")
        if isinstance(arg, Multivector):
            self.error(f"{name} of a multivector", start)
        return _func(name, arg)

    def _blade(self, start):
        t = self.text
        idx = []
        while True:
            self.skip()
            j = self.pos
            while j < len(t) and t[j].isdigit():
                j += 1
            if j == self.pos:
                self.error("expected a blade index")
            idx.append(int(t[self.pos:j]))
            self.pos = j
            if self.peek() == ",":
                self.pos += 1
                continue
            self.expect(")")
            break
        if any(k >= self.alg.dim for k in idx):
            self.error(f"blade index out of range 0..{self.alg.dim - 1}", start)
        if len(set(idx)) != len(idx):
            return Multivector.zero(self.alg, self.frame)
        return Multivector.blade(self.alg, idx, 1.0, self.frame)


def parse_multivector(text: str, cf: Coframe, constants=None) -> Multivector:
    """Parse a literal such as ``"x1 * e(0) + 2 * e(1,2)"`` over the coframe's chart."""
    names = {n: i for i, n in enumerate(cf.chart.coord_names)}
    return _MVParser(text, names, constants or {}, algebra_of(cf), cf).parse()


def random_multivector(alg: Algebra, rng, grades=None, frame=None) -> Multivector:
    """Numeric random multivector (constant components)."""
    comps = []
    for m in range(alg.size):
        if grades is None or alg.grades[m] in grades:
            comps.append(float(rng.normal()))
        else:
            comps.append(0.0)
    return Multivector(alg, comps, frame)


def random_field(cf: Coframe, rng, grades=None) -> Multivector:
    """Seeded smooth field: each chosen component is c0 + c1 sin(x_i) + c2 x_j x_k / 10."""
    from .symexpr import sin as _sin
    alg = algebra_of(cf)
    n = cf.dim
    x = cf.chart.coords
    comps = []
    for m in range(alg.size):
        if grades is not None and alg.grades[m] not in grades:
            comps.append(0.0)
            continue
        c = rng.normal(size=3)
        i, j, k = (int(v) for v in rng.integers(0, n, size=3))
        comps.append(float(c[0]) + float(c[1]) * _sin(x[i]) + (0.1 * float(c[2])) * x[j] * x[k])
    return Multivector(alg, comps, cf)


def blade_count(n: int, k: int) -> int:
    return comb(n, k)


__all__ = [
    "Algebra", "Multivector", "FrameMismatchError", "CliffordCalculus", "vector", "theta",
    "theta_lower", "dx", "coordinate_form", "exterior_derivative", "codifferential",
    "to_coordinate", "from_coordinate", "frame_vector", "parse_multivector", "hodge_sign",
    "random_multivector", "random_field", "blade_mask", "blade_indices", "grade_of", "algebra_of",
    "blade_count", "ParseError",
]
