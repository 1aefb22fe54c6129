"""Scalar expression engine.

Expressions are immutable, hash-consed DAG nodes: building the same
expression twice returns the same object, so identity comparison is
structural equality and shared subexpressions are evaluated once.
"""
from __future__ import annotations

import math
import threading
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expr", "ScalarField", "ParseError", "DomainError", "const", "var", "ZERO", "ONE",
    "sin", "cos", "tan", "cot", "exp", "ln", "sqrt", "add_all", "parse", "to_str",
    "diff", "Evaluator", "evaluate", "eval_at", "free_vars", "node_count",
]

FUNCTIONS = ("sin", "cos", "tan", "cot", "exp", "ln", "sqrt")

_table: dict = {}
_lock = threading.Lock()


class ParseError(ValueError):
    """Syntax or identifier error; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int, identifier: str | None = None):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset
        self.identifier = identifier


class DomainError(ArithmeticError):
    """Raised when a subexpression leaves its real domain at a sample point."""

    def __init__(self, message: str, node: "Expr", point=None):
        self.node = node
        self.point = point
        where = "" if point is None else f" at point {tuple(float(v) for v in point)}"
        super().__init__(f"{message} in subexpression {to_str(node, limit=200)}{where}")


class Expr:
    """One interned expression node.

    ``op`` is one of ``const``, ``var``, ``add``, ``mul``, ``div``, ``pow``,
    ``neg`` or a function name. ``val`` holds the float of a constant, the
    coordinate index of a variable, or the exponent of a power.
    """

    __slots__ = ("op", "args", "val", "name", "_diff", "__weakref__")

    op: str
    args: tuple
    val: object
    name: str | None

    def __new__(cls, op, args=(), val=None, name=None):
        key = (op, tuple(id(a) for a in args), val, name)
        node = _table.get(key)
        if node is not None:
            return node
        with _lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                object.__setattr__(node, "op", op)
                object.__setattr__(node, "args", tuple(args))
                object.__setattr__(node, "val", val)
                object.__setattr__(node, "name", name)
                object.__setattr__(node, "_diff", {})
                _table[key] = node
        return node

    def __setattr__(self, key, value):
        raise AttributeError("Expr is immutable")

    def __reduce__(self):
        return (Expr, (self.op, self.args, self.val, self.name))

    # arithmetic sugar; unknown operand types defer to the other side
    def __add__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _add(self, o)

    def __radd__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _add(o, self)

    def __sub__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _add(self, _neg(o))

    def __rsub__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _add(o, _neg(self))

    def __mul__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _mul(self, o)

    def __rmul__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _mul(o, self)

    def __truediv__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _div(self, o)

    def __rtruediv__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _div(o, self)

    def __pow__(self, other):
        o = _try_coerce(other)
        return NotImplemented if o is None else _pow(self, o)

    def __neg__(self):
        return _neg(self)

    def __pos__(self):
        return self

    def __repr__(self):
        return f"Expr({to_str(self, limit=120)})"

    def __str__(self):
        return to_str(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def is_zero(self) -> bool:
        return self.op == "const" and self.val == 0.0


ScalarField = Expr


def const(value: float) -> Expr:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {value!r}")
    if v == 0.0:
        v = 0.0  # fold -0.0
    return Expr("const", (), v)


def var(index: int, name: str) -> Expr:
    return Expr("var", (), int(index), name)


ZERO = const(0.0)
ONE = const(1.0)
PI = math.pi


def _try_coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (Real, np.floating, np.integer)):
        return const(float(x))
    return None


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (Real, np.floating, np.integer)):
        return const(float(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _neg(a: Expr) -> Expr:
    if a.op == "const":
        return const(-a.val)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def _add(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.val + b.val)
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if (b.op == "neg" and b.args[0] is a) or (a.op == "neg" and a.args[0] is b):
        return ZERO
    return Expr("add", (a, b))


def _mul(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.val * b.val)
    if a.is_zero or b.is_zero:
        return ZERO
    if a.op == "const":
        if a.val == 1.0:
            return b
        if a.val == -1.0:
            return _neg(b)
    if b.op == "const":
        if b.val == 1.0:
            return a
        if b.val == -1.0:
            return _neg(a)
        a, b = b, a  # constants first keeps printing tidy
    if a.op == "neg" and b.op == "neg":
        return _mul(a.args[0], b.args[0])
    if a.op == "neg":
        return _neg(_mul(a.args[0], b))
    if b.op == "neg":
        return _neg(_mul(a, b.args[0]))
    return Expr("mul", (a, b))


def _div(a: Expr, b: Expr) -> Expr:
    if b.is_zero:
        raise ZeroDivisionError("division by the constant 0")
    if a.is_zero:
        return ZERO
    if b.op == "const":
        if a.op == "const":
            return const(a.val / b.val)
        if b.val == 1.0:
            return a
        if b.val == -1.0:
            return _neg(a)
    if a.op == "neg":
        return _neg(_div(a.args[0], b))
    return Expr("div", (a, b))


def _pow(a: Expr, b: Expr) -> Expr:
    if b.op != "const":
        raise ValueError("exponent must fold to a constant")
    n = b.val
    if n == 0.0:
        return ONE
    if n == 1.0:
        return a
    if a.op == "const":
        if a.val < 0 and not float(n).is_integer():
            raise ValueError(f"negative base {a.val} with non-integer exponent {n}")
        if a.val == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return const(a.val ** n)
    return Expr("pow", (a,), float(n))


def _func(name: str, a: Expr) -> Expr:
    if a.op == "const":
        x = a.val
        if name == "sin":
            return const(math.sin(x))
        if name == "cos":
            return const(math.cos(x))
        if name == "exp":
            return const(math.exp(x))
        if name == "sqrt" and x >= 0:
            return const(math.sqrt(x))
        if name == "ln" and x > 0:
            return const(math.log(x))
        if name == "tan" and abs(math.cos(x)) > _POLE_EPS:
            return const(math.tan(x))
        if name == "cot" and abs(math.sin(x)) > _POLE_EPS:
            return const(math.cos(x) / math.sin(x))
    return Expr(name, (a,))


def sin(a) -> Expr:
    return _func("sin", _coerce(a))


def cos(a) -> Expr:
    return _func("cos", _coerce(a))


def tan(a) -> Expr:
    return _func("tan", _coerce(a))


def cot(a) -> Expr:
    return _func("cot", _coerce(a))


def exp(a) -> Expr:
    return _func("exp", _coerce(a))


def ln(a) -> Expr:
    return _func("ln", _coerce(a))


def sqrt(a) -> Expr:
    return _func("sqrt", _coerce(a))


def add_all(terms: Iterable) -> Expr:
    """Sum as a balanced tree, so long sums stay shallow."""
    items = [_coerce(t) for t in terms]
    items = [t for t in items if not t.is_zero]
    if not items:
        return ZERO
    while len(items) > 1:
        nxt = [_add(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


# ----------------------------------------------------------------- traversal

def _postorder(roots: Iterable[Expr], skip=None) -> list:
    """Children-before-parents order of every node reachable from ``roots``."""
    order = []
    seen = set() if skip is None else skip
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in node.args:
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def node_count(*roots: Expr) -> int:
    return len(_postorder(roots))


def free_vars(e: Expr) -> set:
    return {n.val for n in _postorder([e]) if n.op == "var"}


# -------------------------------------------------------------- differentiation

def diff(f: Expr, index: int) -> Expr:
    """Exact partial derivative with respect to coordinate ``index``."""
    cached = f._diff.get(index)
    if cached is not None:
        return cached
    for node in _postorder([f]):
        if index in node._diff:
            continue
        node._diff[index] = _diff_node(node, index)
    return f._diff[index]


def _diff_node(n: Expr, k: int) -> Expr:
    op = n.op
    if op == "const":
        return ZERO
    if op == "var":
        return ONE if n.val == k else ZERO
    a = n.args[0]
    da = a._diff[k]
    if op == "add":
        return _add(da, n.args[1]._diff[k])
    if op == "neg":
        return _neg(da)
    if op == "mul":
        b = n.args[1]
        return _add(_mul(da, b), _mul(a, b._diff[k]))
    if op == "div":
        b = n.args[1]
        db = b._diff[k]
        return _add(_div(da, b), _neg(_div(_mul(a, db), _mul(b, b))))
    if da.is_zero:
        return ZERO
    if op == "pow":
        m = n.val
        return _mul(_mul(const(m), _pow(a, const(m - 1.0))), da)
    if op == "sin":
        return _mul(cos(a), da)
    if op == "cos":
        return _neg(_mul(sin(a), da))
    if op == "tan":
        c = cos(a)
        return _div(da, _mul(c, c))
    if op == "cot":
        s = sin(a)
        return _neg(_div(da, _mul(s, s)))
    if op == "exp":
        return _mul(n, da)
    if op == "ln":
        return _div(da, a)
    if op == "sqrt":
        return _div(da, _mul(const(2.0), n))
    raise AssertionError(op)


# -------------------------------------------------------------------- printing

_PREC = {"add": 1, "neg": 2, "mul": 3, "div": 3, "pow": 5}


def _fmt_const(v: float) -> str:
    if v == math.pi:
        return "pi"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_str(e: Expr, limit: int | None = None) -> str:
    """Render in the input grammar; ``parse(to_str(e))`` reproduces ``e``'s values."""
    budget = [limit if limit is not None else -1]

    def emit(n: Expr, parent: int) -> str:
        if budget[0] == 0:
            return "..."
        s = _render(n)
        if budget[0] > 0:
            budget[0] = max(0, budget[0] - len(s))
        return s

    def wrap(n: Expr, min_prec: int) -> str:
        s = emit(n, min_prec)
        p = _prec(n)
        return f"({s})" if p < min_prec else s

    def _prec(n: Expr) -> int:
        if n.op == "const":
            return 1 if n.val < 0 else 9
        return _PREC.get(n.op, 9)

    def _render(n: Expr) -> str:
        op = n.op
        if op == "const":
            return _fmt_const(n.val)
        if op == "var":
            return n.name
        if op == "add":
            a, b = n.args
            if b.op == "neg":
                return f"{wrap(a, 1)} - {wrap(b.args[0], 2)}"
            if b.op == "const" and b.val < 0:
                return f"{wrap(a, 1)} - {_fmt_const(-b.val)}"
            return f"{wrap(a, 1)} + {wrap(b, 2)}"
        if op == "neg":
            return f"-{wrap(n.args[0], 3)}"
        if op == "mul":
            return f"{wrap(n.args[0], 3)}*{wrap(n.args[1], 4)}"
        if op == "div":
            return f"{wrap(n.args[0], 3)}/{wrap(n.args[1], 4)}"
        if op == "pow":
            return f"{wrap(n.args[0], 6)}^{_exp_str(n.val)}"
        return f"{op}({emit(n.args[0], 0)})"

    return emit(e, 0)


def _exp_str(v: float) -> str:
    s = _fmt_const(v)
    return f"({s})" if v < 0 or not float(v).is_integer() else s


# --------------------------------------------------------------------- parsing

class _Parser:
    def __init__(self, text: str, names: Mapping[str, int], constants: Mapping[str, float]):
        self.text = text
        self.names = names
        self.constants = constants
        self.pos = 0

    def offset(self, pos=None) -> int:
        p = self.pos if pos is None else pos
        return len(self.text[:p].encode("utf-8"))

    def error(self, msg: str, pos=None, ident=None):
        raise ParseError(msg, self.offset(pos), ident)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def parse(self) -> Expr:
        if not self.text.strip():
            self.error("empty expression")
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            start = self.pos
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero:
                    self.error("division by the constant 0", start)
                e = e / rhs
        return e

    def unary(self) -> Expr:
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        if self.peek() == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek() == "^":
            start = self.pos
            self.pos += 1
            ex = self.unary()
            try:
                return base ** ex
            except (ValueError, ZeroDivisionError) as err:
                self.error(str(err), start)
        return base

    def atom(self) -> Expr:
        ch = self.peek()
        if not ch:
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            return self.identifier()
        self.error(f"unexpected {ch!r}")

    def number(self) -> Expr:
        t, start = self.text, self.pos
        i = start
        while i < len(t) and (t[i].isdigit() or t[i] == "."):
            i += 1
        if i < len(t) and t[i] in "eE":
            j = i + 1
            if j < len(t) and t[j] in "+-":
                j += 1
            if j < len(t) and t[j].isdigit():
                while j < len(t) and t[j].isdigit():
                    j += 1
                i = j
        try:
            v = float(t[start:i])
        except ValueError:
            self.error(f"malformed number {t[start:i]!r}", start)
        self.pos = i
        return const(v)

    def identifier(self) -> Expr:
        t, start = self.text, self.pos
        i = start
        while i < len(t) and (t[i].isalnum() or t[i] == "_") and t[i].isascii():
            i += 1
        name = t[start:i]
        self.pos = i
        if self.peek() == "(":
            if name not in FUNCTIONS:
                self.error(f"unknown function {name!r}", start, name)
            self.pos += 1
            arg = self.expr()
            self.expect(")")
            return _func(name, arg)
        if name in self.names:
            return var(self.names[name], name)
        if name == "pi":
            return const(math.pi)
        if name in self.constants:
            return const(self.constants[name])
        if name in FUNCTIONS:
            self.error(f"function {name!r} needs an argument", start, name)
        self.error(f"unknown identifier {name!r}", start, name)


def parse(text: str, chart=None, constants: Mapping[str, float] | None = None,
          names: Sequence[str] | None = None) -> Expr:
    """Parse ``text``; identifiers must be coordinates of ``chart`` (or ``names``)."""
    if names is None:
        names = chart.coord_names if chart is not None else ()
    lookup = {n: i for i, n in enumerate(names)}
    return _Parser(text, lookup, constants or {}).parse()


# ------------------------------------------------------------------ evaluation

_POLE_EPS = 1e-14


class Evaluator:
    """Vectorized evaluation over a fixed batch of points.

    Node values are cached by identity, so evaluating many related
    expressions against the same points reuses every shared subexpression.
    """

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        self.points = pts
        self.n = pts.shape[0]
        self._cache: dict = {}

    def __call__(self, e: Expr) -> np.ndarray:
        return self.many([e])[0]

    def many(self, exprs: Sequence[Expr]) -> list:
        cache = self._cache
        todo = _postorder([e for e in exprs if id(e) not in cache], skip=set(cache))
        with np.errstate(all="ignore"):
            for node in todo:
                cache[id(node)] = (node, self._compute(node))
        out = []
        for e in exprs:
            v = cache[id(e)][1]
            out.append(np.broadcast_to(np.asarray(v, dtype=float), (self.n,)))
        return out

    def _arg(self, node: Expr, i: int = 0):
        return self._cache[id(node.args[i])][1]

    def _fail(self, msg, node, mask):
        idx = int(np.flatnonzero(np.broadcast_to(mask, (self.n,)))[0])
        raise DomainError(msg, node, self.points[idx])

    def _compute(self, node: Expr):
        op = node.op
        if op == "const":
            return node.val
        if op == "var":
            if node.val >= self.points.shape[1]:
                raise DomainError("variable index beyond point dimension", node)
            return self.points[:, node.val]
        a = self._arg(node)
        if op == "add":
            return a + self._arg(node, 1)
        if op == "mul":
            return a * self._arg(node, 1)
        if op == "neg":
            return -a
        if op == "div":
            b = self._arg(node, 1)
            bad = np.asarray(b) == 0
            if np.any(bad):
                self._fail("division by zero", node, bad)
            r = a / b
        elif op == "pow":
            m = node.val
            if not float(m).is_integer():
                bad = np.asarray(a) < 0
                if np.any(bad):
                    self._fail("negative base with non-integer exponent", node, bad)
            if m < 0:
                bad = np.asarray(a) == 0
                if np.any(bad):
                    self._fail("zero to a negative power", node, bad)
            r = np.power(a, int(m)) if float(m).is_integer() and m > 0 else np.power(a, m)
        elif op == "sin":
            return np.sin(a)
        elif op == "cos":
            return np.cos(a)
        elif op == "exp":
            r = np.exp(a)
        elif op == "ln":
            bad = np.asarray(a) <= 0
            if np.any(bad):
                self._fail("logarithm of a nonpositive value", node, bad)
            r = np.log(a)
        elif op == "sqrt":
            bad = np.asarray(a) < 0
            if np.any(bad):
                self._fail("square root of a negative value", node, bad)
            r = np.sqrt(a)
        elif op == "tan":
            c = np.cos(a)
            bad = np.abs(c) <= _POLE_EPS * np.maximum(1.0, np.abs(a))
            if np.any(bad):
                self._fail("tan at a pole", node, bad)
            r = np.sin(a) / c
        elif op == "cot":
            s = np.sin(a)
            bad = np.abs(s) <= _POLE_EPS * np.maximum(1.0, np.abs(a))
            if np.any(bad):
                self._fail("cot at a multiple of pi", node, bad)
            r = np.cos(a) / s
        else:
            raise AssertionError(op)
        bad = ~np.isfinite(r)
        if np.any(bad):
            self._fail("non-finite result", node, bad)
        return r


def evaluate(exprs, points) -> np.ndarray:
    """Evaluate one expression or a sequence at ``points`` (shape N×dim)."""
    ev = Evaluator(points)
    if isinstance(exprs, Expr):
        return ev(exprs).copy()
    return np.array(ev.many(list(exprs)))


def eval_at(e: Expr, point) -> float:
    """Evaluate at a single point."""
    return float(Evaluator(np.asarray(point, dtype=float)[None, :])(e)[0])
