import math
import textwrap

import numpy as np
import pytest

from tetradlab.manifest import (SUITE_NAMES, ManifestError, Tolerances, default_seed,
                                load_manifest, manifest_from_text, validate_suites)
from tetradlab.suites import run_suites
from tetradlab.symexpr import Evaluator

SPHERE_BY_METRIC = textwrap.dedent("""\
    # unit sphere given through its metric
    [chart]
    name = sphere
    coords = x1, x2
    domain.x1 = 0, pi
    domain.x2 = 0, 2*pi
    signature = 2, 0

    [metric]
    g.x1.x1 = "R^2"
    g.x2.x2 = "R^2 * sin(x1)^2"

    [const]
    R = 1.5

    [sampling]
    points = 8
    seed = 4
    suites = suite.connection, suite.operators
    """)


def test_builtin_with_parameter():
    m = manifest_from_text("manifold = builtin:s2\nbuiltin.R = 2\n")
    assert m.builtin == "s2" and m.manifold.params["R"] == 2.0
    assert m.suites == SUITE_NAMES
    assert m.tolerances == Tolerances()


def test_metric_manifest_builds_and_passes():
    m = manifest_from_text(SPHERE_BY_METRIC)
    assert m.manifold.chart.coord_names == ("x1", "x2")
    assert m.points == 8 and m.seed == 4
    assert m.suites == ("suite.connection", "suite.operators")
    ev = Evaluator(np.array([[1.0, 2.0]]))
    assert ev(m.manifold.metric.g[1][1])[0] == pytest.approx(2.25 * math.sin(1.0) ** 2)
    assert run_suites(m).passed


def test_coframe_manifest():
    text = textwrap.dedent("""\
        chart.coords = t, x
        chart.domain.t = 1, 2
        chart.domain.x = 0, 1
        signature = 1, 1
        coframe.q.0.t = 1
        coframe.q.1.x = "t"
        """)
    m = manifest_from_text(text)
    assert m.manifold.coframe.q[1][1].op == "var"
    assert run_suites(m, ["suite.counterexample"], points=4).passed


def test_columbus_and_custom_connections():
    m = manifest_from_text("manifold = builtin:s2\nconnection = columbus\n")
    assert m.connection == "columbus"
    text = ("manifold = builtin:s2\nconnection = custom\n"
            "connection.gamma.0.1.1 = \"-sin(x1)*cos(x1)\"\n"
            "gamma.1.0.1 = \"cot(x1)\"\ngamma.1.1.0 = \"cot(x1)\"\n")
    m = manifest_from_text(text)
    assert m.connection == "custom" and m.gamma is not None
    assert run_suites(m, ["suite.connection"], points=6).passed


@pytest.mark.parametrize("text,needle", [
    ("manifold = builtin:s2\nfoo = 1\n", "foo"),
    ("manifold = builtin:torus\n", "torus"),
    ("manifold = builtin:s2\nsuites = suite.nope\n", "suite.maxwell"),
    ("manifold = builtin:s2\nmanifold = builtin:s2\n", "duplicate"),
    ("manifold = builtin:s2\nchart.coords = a, b\n", "built-in"),
    ("manifold = builtin:s2\nconnection = affine\n", "affine"),
    ("manifold = builtin:s2\nsampling.points = 0\n", "points"),
    ("this line has no equals sign\n", "key = value"),
])
def test_errors_name_the_problem(text, needle):
    with pytest.raises(ManifestError) as info:
        manifest_from_text(text)
    assert needle in str(info.value)


def test_error_reports_line_and_section():
    text = "manifold = builtin:s2\n[sampling]\nbogus = 3\n"
    with pytest.raises(ManifestError) as info:
        manifest_from_text(text)
    err = info.value
    assert err.line == 3 and err.section == "sampling"
    assert "line 3" in str(err) and "[sampling]" in str(err)


def test_metric_and_coframe_together_rejected():
    text = SPHERE_BY_METRIC + "[coframe]\nq.0.0 = 1\n"
    with pytest.raises(ManifestError, match="metric"):
        manifest_from_text(text)


def test_asymmetric_metric_rejected():
    text = SPHERE_BY_METRIC.replace('[const]', 'g.x1.x2 = "1"\ng.x2.x1 = "2"\n[const]')
    with pytest.raises(ManifestError, match="symmetric"):
        manifest_from_text(text)


def test_bad_expression_names_key():
    text = SPHERE_BY_METRIC.replace('"R^2 * sin(x1)^2"', '"R^2 * sin(y)^2"')
    with pytest.raises(ManifestError) as info:
        manifest_from_text(text)
    assert "g.x2.x2" in str(info.value) and "y" in str(info.value)


def test_tolerance_overrides():
    m = manifest_from_text("manifold = builtin:s2\n[sampling]\ntol.first = 1e-8\n")
    assert m.tolerances.first == 1e-8 and m.tolerances.second == 1e-7
    assert m.tolerances.scaled(10).pipeline == pytest.approx(1e-5)


def test_validate_suites():
    assert validate_suites(["suite.maxwell"]) == ("suite.maxwell",)
    with pytest.raises(ManifestError):
        validate_suites(["suite.maxwel"])


def test_seed_from_environment(monkeypatch):
    monkeypatch.delenv("TETRADLAB_SEED", raising=False)
    assert default_seed() == 0
    monkeypatch.setenv("TETRADLAB_SEED", "42")
    assert default_seed() == 42
    monkeypatch.setenv("TETRADLAB_SEED", "forty")
    with pytest.raises(ManifestError):
        default_seed()


def test_load_from_file(tmp_path):
    p = tmp_path / "sphere.toml"
    p.write_text(SPHERE_BY_METRIC)
    assert load_manifest(p).path == str(p)
    with pytest.raises(ManifestError, match="not found"):
        load_manifest(tmp_path / "missing.toml")
