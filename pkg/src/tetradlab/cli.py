"""Command-line entry point: ``tetradlab check | list-suites | list-builtins | eval``."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .builtins import BUILTINS
from .clifford import blade_indices, parse_multivector
from .connection import levi_civita
from .manifest import ManifestError, default_seed, load_manifest, validate_suites
from .operators import Operators
from .suites import DESCRIPTIONS, SUITES, run_suites
from .symexpr import DomainError, Evaluator, ParseError, parse

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_POINTS = 16
OPS = ("dirac", "d", "delta", "box", "ricci", "einstein")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tetradlab", description="Pointwise identity checks for tetrad geometry.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="run check suites for a manifest")
    c.add_argument("manifest")
    c.add_argument("--suite", action="append", default=None, metavar="NAME",
                   help="suite to run (repeatable; default: the manifest's list)")
    c.add_argument("--points", type=_positive_int, default=None)
    c.add_argument("--seed", type=_seed, default=None)
    c.add_argument("--tol-scale", type=_positive_float, default=1.0)
    c.add_argument("--json", action="store_true")
    c.add_argument("--wrong-minus", action="store_true",
                   help="compute tetrad-component torsion with nabla- instead of nabla+")

    sub.add_parser("list-suites", help="print the suite catalog")
    sub.add_parser("list-builtins", help="print the built-in manifolds")

    e = sub.add_parser("eval", help="apply an operator to a multivector expression at a point")
    e.add_argument("manifest")
    e.add_argument("--expr", required=True)
    e.add_argument("--op", required=True, choices=OPS)
    e.add_argument("--at", required=True,
                   help="comma-separated coordinates, positional or name=value")
    e.add_argument("--json", action="store_true")
    return p


def _cmd_check(args) -> int:
    m = load_manifest(args.manifest)
    suites = validate_suites(args.suite) if args.suite else m.suites
    points = args.points or m.points or DEFAULT_POINTS
    if args.seed is not None:
        seed = args.seed
    elif m.seed is not None:
        seed = m.seed
    else:
        seed = default_seed()
    report = run_suites(m, suites, points, seed, m.tolerances.scaled(args.tol_scale),
                        args.wrong_minus)
    sys.stdout.write(report.json() if args.json else report.tsv())
    for r in report.rows:
        if math.isinf(r.max_residual):
            print(f"warning: {r.suite} {r.check}: evaluation left its domain at {r.point}",
                  file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _parse_point(text: str, chart) -> np.ndarray:
    names = chart.coord_names
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if len(parts) != chart.dim:
        raise ManifestError(f"--at needs {chart.dim} coordinates, got {len(parts)}")
    vals = [None] * chart.dim
    for i, part in enumerate(parts):
        if "=" in part:
            k, v = (s.strip() for s in part.split("=", 1))
            if k not in names:
                raise ManifestError(f"--at: unknown coordinate {k!r}")
            idx = names.index(k)
        else:
            idx, v = i, part
        try:
            e = parse(v, None, {"pi": math.pi})
        except ParseError as exc:
            raise ManifestError(f"--at: {exc}") from None
        if not e.is_const:
            raise ManifestError(f"--at: {v!r} is not a number")
        vals[idx] = float(e.val)
    if any(v is None for v in vals):
        raise ManifestError("--at: a coordinate is given twice")
    return np.array(vals)


def _blade_label(mask: int) -> str:
    if mask == 0:
        return "1"
    return "e(" + ",".join(str(i) for i in blade_indices(mask)) + ")"


def _cmd_eval(args) -> int:
    m = load_manifest(args.manifest)
    cf = m.manifold.coframe
    try:
        A = parse_multivector(args.expr, cf)
    except ParseError as exc:
        raise ManifestError(f"--expr: {exc}") from None
    point = _parse_point(args.at, m.manifold.chart)
    ops = Operators(levi_civita(m.manifold), m.manifold.metric)
    fn = {"dirac": ops.dirac, "d": ops.calc.d, "delta": ops.calc.delta, "box": ops.box,
          "ricci": ops.ricci_operator, "einstein": ops.einstein_operator}[args.op]
    B = fn(A)
    vals = B.evaluate(Evaluator(point[None, :]))[:, 0]
    if args.json:
        out = {_blade_label(k): float(v) for k, v in enumerate(vals)}
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
    else:
        for k, v in enumerate(vals):
            if v != 0.0:
                sys.stdout.write(f"{_blade_label(k)}\t{v:.12g}\n")
        if not np.any(vals != 0.0):
            sys.stdout.write("0\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-suites":
            for name in SUITES:
                print(f"{name}\t{DESCRIPTIONS[name]}")
            return EXIT_OK
        if args.command == "list-builtins":
            for name, (_, desc) in BUILTINS.items():
                print(f"{name}\t{desc}")
            return EXIT_OK
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_eval(args)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
