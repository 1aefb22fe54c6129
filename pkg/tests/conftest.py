import functools

import numpy as np
import pytest

from tetradlab.builtins import get_builtin
from tetradlab.connection import levi_civita
from tetradlab.geometry import sample_points
from tetradlab.operators import Operators
from tetradlab.symexpr import Evaluator

BUILTIN_NAMES = ("minkowski", "s2", "schwarzschild", "flrw-dust")


@functools.lru_cache(maxsize=None)
def manifold(name):
    return get_builtin(name)


@functools.lru_cache(maxsize=None)
def ops_for(name):
    man = manifold(name)
    return Operators(levi_civita(man), man.metric)


@functools.lru_cache(maxsize=None)
def evaluator(name, count=8, seed=3):
    return Evaluator(sample_points(manifold(name).chart, count, seed))


def worst(ev, x):
    """Largest absolute value over the evaluator's points."""
    from tetradlab.suites import per_point
    return float(np.max(per_point(ev, x)))


@pytest.fixture(params=BUILTIN_NAMES)
def builtin_name(request):
    return request.param
