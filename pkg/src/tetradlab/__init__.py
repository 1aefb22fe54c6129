"""Tetrad geometry and Clifford-bundle calculus, checked pointwise."""
from .builtins import BUILTINS, get_builtin
from .clifford import Algebra, CliffordCalculus, Multivector, parse_multivector, theta
from .connection import Connection, Flavor, build_connection, columbus_connection, levi_civita
from .geometry import Chart, Coframe, Manifold, MetricField, sample_points
from .manifest import Manifest, ManifestError, Tolerances, load_manifest, manifest_from_text
from .operators import Operators
from .suites import Report, run_suites
from .symexpr import Evaluator, Expr, diff, parse

__version__ = "0.1.0"

__all__ = [
    "BUILTINS", "get_builtin", "Algebra", "CliffordCalculus", "Multivector", "parse_multivector",
    "theta", "Connection", "Flavor", "build_connection", "columbus_connection", "levi_civita",
    "Chart", "Coframe", "Manifold", "MetricField", "sample_points", "Manifest", "ManifestError",
    "Tolerances", "load_manifest", "manifest_from_text", "Operators", "Report", "run_suites",
    "Evaluator", "Expr", "diff", "parse",
]
