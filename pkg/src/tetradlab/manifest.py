"""Manifest files: a line-oriented ``key = value`` format with optional ``[section]`` headers.

A key inside ``[section]`` is read as ``section.key``. Recognised keys::

    manifold = builtin:NAME            # or declare a chart plus metric or coframe
    builtin.<param> = number           # e.g. builtin.R = 2 for the sphere
    chart.name = label
    chart.coords = t, r, th, ph
    chart.domain.<coord> = lo, hi       # expressions allowed, e.g. 0, pi
    signature = p, q                    # or chart.signature
    metric.g.<i>.<j> = "<expr>"         # indices 0-based or coordinate names
    coframe.q.<a>.<mu> = "<expr>"
    const.<name> = number
    connection = levicivita | columbus | custom
    connection.gamma.<r>.<m>.<n> = "<expr>"   # also plain gamma.<r>.<m>.<n>
    suites = suite.connection, suite.clifford
    sampling.points = 16
    sampling.seed = 0
    sampling.tol.first | sampling.tol.second | sampling.tol.pipeline = number

Lines starting with ``#`` or ``;`` are comments. Values may be quoted.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .builtins import BUILTINS, get_builtin
from .connection import COLUMBUS, CUSTOM, LEVI_CIVITA
from .geometry import Chart, Manifold, manifold_from_coframe, manifold_from_metric, sample_points
from .symexpr import ZERO, Evaluator, ParseError, parse

SUITE_NAMES = (
    "suite.counterexample", "suite.connection", "suite.clifford", "suite.operators",
    "suite.fieldeq", "suite.lagrangian", "suite.evans-demo", "suite.maxwell",
)
FLAVORS = (LEVI_CIVITA, COLUMBUS, CUSTOM)
SEED_ENV = "TETRADLAB_SEED"


class ManifestError(ValueError):
    """Parse or validation failure; carries its location when known."""

    def __init__(self, message: str, section: str | None = None, key: str | None = None,
                 line: int | None = None, path: str | None = None):
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if section:
            where.append(f"[{section}]")
        if key:
            where.append(f"key {key!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.section, self.key, self.line = section, key, line


@dataclass(frozen=True)
class Tolerances:
    """Residual ceilings by check tier."""

    first: float = 1e-9      # first-derivative identities
    second: float = 1e-7     # second-derivative and operator identities
    pipeline: float = 1e-6   # full field-equation pipelines

    def scaled(self, x: float) -> "Tolerances":
        return Tolerances(self.first * x, self.second * x, self.pipeline * x)

    def of(self, tier: str) -> float:
        return getattr(self, tier)


@dataclass(frozen=True)
class Manifest:
    manifold: Manifold
    builtin: str | None          # catalog name when loaded from ``builtin:NAME``
    connection: str = LEVI_CIVITA
    gamma: tuple | None = None
    suites: tuple = SUITE_NAMES
    points: int | None = None
    seed: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    path: str | None = None

    @property
    def name(self) -> str:
        return self.manifold.name


@dataclass
class _Entry:
    value: str
    line: int
    section: str | None
    raw_key: str


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ManifestError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ------------------------------------------------------------ reading

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w.\-]*)\s*\]$")
_KEY = re.compile(r"^[A-Za-z_][\w.\-]*$")


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def parse_entries(text: str, path: str | None = None) -> dict:
    entries: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            continue
        if "=" not in line:
            raise ManifestError("expected 'key = value'", section, None, lineno, path)
        k, v = line.split("=", 1)
        k = k.strip()
        if not _KEY.match(k):
            raise ManifestError("malformed key", section, k, lineno, path)
        full = f"{section}.{k}" if section else k
        if full in entries:
            raise ManifestError(f"duplicate key (first set on line {entries[full].line})",
                                section, k, lineno, path)
        entries[full] = _Entry(_unquote(v), lineno, section, k)
    return entries


def load_manifest(path) -> Manifest:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ManifestError("file not found", path=str(p)) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ManifestError(f"cannot read file: {exc}", path=str(p)) from None
    return manifest_from_text(text, str(p))


def manifest_from_text(text: str, path: str | None = None) -> Manifest:
    return _Builder(parse_entries(text, path), path).build()


# ------------------------------------------------------------ validation

class _Builder:
    def __init__(self, entries: dict, path: str | None):
        self.e = entries
        self.path = path
        self.used: set = set()

    def err(self, msg: str, key: str | None = None) -> ManifestError:
        ent = self.e.get(key) if key else None
        if ent is None:
            return ManifestError(msg, None, key, None, self.path)
        return ManifestError(msg, ent.section, ent.raw_key, ent.line, self.path)

    def get(self, *keys):
        for k in keys:
            if k in self.e:
                self.used.add(k)
                return k, self.e[k].value
        return None, None

    def family(self, *prefixes) -> dict:
        out = {}
        for k in self.e:
            for pre in prefixes:
                if k.startswith(pre + "."):
                    self.used.add(k)
                    out[k] = k[len(pre) + 1:]
        return out

    def number(self, key: str, value: str, constants=None) -> float:
        try:
            e = parse(value, None, {"pi": math.pi, **(constants or {})})
        except ParseError as exc:
            raise self.err(f"bad number: {exc}", key) from None
        if not e.is_const:
            raise self.err("expected a constant", key)
        return float(e.val)

    def integer(self, key: str, value: str, lo: int) -> int:
        try:
            v = int(value)
        except ValueError:
            raise self.err(f"expected an integer, got {value!r}", key) from None
        if v < lo:
            raise self.err(f"must be at least {lo}", key)
        return v

    # -------------------------------------------------------- pieces

    def constants(self) -> dict:
        out = {}
        for key, name in sorted(self.family("const").items()):
            out[name] = self.number(key, self.e[key].value)
        return out

    def build(self) -> Manifest:
        consts = self.constants()
        has_metric = bool([k for k in self.e if k.startswith("metric.")])
        has_coframe = bool([k for k in self.e if k.startswith("coframe.")])
        if has_metric and has_coframe:
            k = min((k for k in self.e if k.startswith(("metric.", "coframe."))),
                    key=lambda k: self.e[k].line)
            raise self.err("give either a metric block or a coframe block, not both", k)
        mkey, mval = self.get("manifold")
        builtin = None
        if mval is not None and mval.startswith("builtin:"):
            builtin = mval[len("builtin:"):].strip()
            if builtin not in BUILTINS:
                raise self.err(f"unknown built-in {builtin!r}; choose from "
                               f"{', '.join(BUILTINS)}", mkey)
            for k in self.e:
                if k.startswith(("metric.", "coframe.", "chart.")) or k == "signature":
                    raise self.err("a built-in manifold cannot be combined with "
                                   "chart/metric/coframe keys", k)
            params = {name: self.number(k, self.e[k].value, consts)
                      for k, name in sorted(self.family("builtin").items())}
            try:
                man = get_builtin(builtin, **params)
            except TypeError:
                raise self.err(f"unsupported parameter for {builtin}",
                               next(iter(self.family("builtin")), mkey)) from None
            except ValueError as exc:
                raise self.err(str(exc), mkey) from None
        elif mval is not None:
            raise self.err("expected 'builtin:NAME' (or omit it and declare a chart)", mkey)
        else:
            if not (has_metric or has_coframe):
                raise self.err("no manifold: set 'manifold = builtin:NAME' or give a metric "
                               "or coframe block")
            man = self.declared_manifold(has_metric, consts)
        flavor, gamma = self.connection(man, consts)
        suites = self.suites()
        points = seed = None
        k, v = self.get("sampling.points", "points")
        if v is not None:
            points = self.integer(k, v, 1)
        k, v = self.get("sampling.seed", "seed")
        if v is not None:
            seed = self.integer(k, v, 0)
        tol = Tolerances()
        for tier in ("first", "second", "pipeline"):
            k, v = self.get(f"sampling.tol.{tier}", f"tol.{tier}")
            if v is not None:
                x = self.number(k, v)
                if not x > 0:
                    raise self.err("tolerance must be positive", k)
                tol = replace(tol, **{tier: x})
        leftover = sorted(set(self.e) - self.used, key=lambda k: self.e[k].line)
        if leftover:
            raise self.err("unknown key", leftover[0])
        return Manifest(man, builtin, flavor, gamma, suites, points, seed, tol, self.path)

    def declared_manifold(self, has_metric: bool, consts: dict) -> Manifold:
        k, v = self.get("chart.coords", "coords")
        if v is None:
            raise self.err("missing chart.coords")
        names = tuple(s.strip() for s in v.split(",") if s.strip())
        if len(names) not in (2, 3, 4):
            raise self.err(f"chart must have 2, 3 or 4 coordinates, got {len(names)}", k)
        if len(set(names)) != len(names):
            raise self.err("coordinate names repeat", k)
        for nm in names:
            if not re.match(r"^[A-Za-z_]\w*$", nm) or nm in ("pi", "e"):
                raise self.err(f"bad coordinate name {nm!r}", k)
        dim = len(names)
        dom = {}
        for key, nm in self.family("chart.domain").items():
            if nm not in names:
                raise self.err(f"domain for unknown coordinate {nm!r}", key)
            parts = self.e[key].value.split(",")
            if len(parts) != 2:
                raise self.err("domain must be 'lo, hi'", key)
            lo, hi = (self.number(key, p, consts) for p in parts)
            if not lo < hi:
                raise self.err("domain needs lo < hi", key)
            dom[nm] = (lo, hi)
        missing = [nm for nm in names if nm not in dom]
        if missing:
            raise self.err(f"missing chart.domain for {', '.join(missing)}")
        k, v = self.get("signature", "chart.signature")
        if v is None:
            raise self.err("missing signature (p, q)")
        try:
            p, q = (int(s) for s in v.split(","))
        except ValueError:
            raise self.err("signature must be 'p, q'", k) from None
        if p < 0 or q < 0 or p + q != dim:
            raise self.err(f"signature ({p},{q}) does not match {dim} coordinates", k)
        chart = Chart(dim, names, tuple(dom[nm] for nm in names), (p, q))
        _, label = self.get("chart.name", "name")
        label = label or (Path(self.path).stem if self.path else "manifest")
        block, letter = ("metric", "g") if has_metric else ("coframe", "q")
        mat = [[ZERO] * dim for _ in range(dim)]
        seen = {}
        for key, rest in self.family(f"{block}.{letter}").items():
            parts = rest.split(".")
            if len(parts) != 2:
                raise self.err(f"expected {block}.{letter}.<i>.<j>", key)
            if block == "metric":
                i, j = (self.index(key, s, names, coord=True) for s in parts)
            else:
                i = self.index(key, parts[0], names, coord=False)
                j = self.index(key, parts[1], names, coord=True)
            if (i, j) in seen:
                raise self.err(f"entry ({i},{j}) set twice", key)
            seen[(i, j)] = key
            mat[i][j] = self.expr(key, chart, consts)
        others = {k for k in self.e if k.startswith(block + ".")} - set(seen.values())
        if others:
            raise self.err("unknown key", min(others, key=lambda k: self.e[k].line))
        pts = sample_points(chart, 32, 0)
        try:
            if block == "metric":
                for (i, j), key in seen.items():
                    if (j, i) not in seen:
                        mat[j][i] = mat[i][j]
                    elif i < j:
                        ev = Evaluator(pts)
                        if np.max(np.abs(ev(mat[i][j]) - ev(mat[j][i]))) > 1e-12:
                            raise self.err("metric is not symmetric", key)
                return manifold_from_metric(label, chart, mat, pts)
            return manifold_from_coframe(label, chart, mat, pts)
        except ManifestError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise self.err(f"invalid {block}: {exc}", next(iter(seen.values()), None)) from None

    def index(self, key: str, s: str, names: tuple, coord: bool) -> int:
        if coord and s in names:
            return names.index(s)
        try:
            i = int(s)
        except ValueError:
            raise self.err(f"bad index {s!r}", key) from None
        if not 0 <= i < len(names):
            raise self.err(f"index {i} out of range 0..{len(names) - 1}", key)
        return i

    def expr(self, key: str, chart: Chart, consts: dict):
        try:
            return parse(self.e[key].value, chart, {"pi": math.pi, **consts})
        except ParseError as exc:
            raise self.err(str(exc), key) from None

    def connection(self, man: Manifold, consts: dict):
        k, v = self.get("connection", "connection.flavor")
        flavor = (v or LEVI_CIVITA).strip().lower().replace("-", "").replace("_", "")
        if flavor not in FLAVORS:
            raise self.err(f"unknown connection {v!r}; choose from {', '.join(FLAVORS)}", k)
        fam = self.family("connection.gamma", "gamma")
        if flavor != CUSTOM:
            if fam:
                raise self.err("gamma entries need 'connection = custom'", next(iter(fam)))
            return flavor, None
        n, names = man.dim, man.chart.coord_names
        gam = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        seen = set()
        for key, rest in fam.items():
            parts = rest.split(".")
            if len(parts) != 3:
                raise self.err("expected gamma.<r>.<m>.<n>", key)
            r, m, v_ = (self.index(key, s, names, coord=True) for s in parts)
            if (r, m, v_) in seen:
                raise self.err("coefficient set twice", key)
            seen.add((r, m, v_))
            gam[r][m][v_] = self.expr(key, man.chart, consts)
        return flavor, tuple(tuple(tuple(row) for row in blk) for blk in gam)

    def suites(self) -> tuple:
        k, v = self.get("suites", "sampling.suites")
        if v is None:
            return SUITE_NAMES
        names = [s.strip() for s in v.split(",") if s.strip()]
        return validate_suites(names, lambda msg: self.err(msg, k))


def validate_suites(names, make_error=ManifestError) -> tuple:
    out = []
    for nm in names:
        full = nm if nm.startswith("suite.") else f"suite.{nm}"
        if full not in SUITE_NAMES:
            raise make_error(f"unknown suite {nm!r}; valid suites: {', '.join(SUITE_NAMES)}")
        if full not in out:
            out.append(full)
    if not out:
        raise make_error("empty suite list")
    return tuple(out)


__all__ = [
    "Manifest", "ManifestError", "Tolerances", "SUITE_NAMES", "SEED_ENV", "default_seed",
    "load_manifest", "manifest_from_text", "parse_entries", "validate_suites",
]
