import numpy as np
import pytest

from multipolar.geometry import Tet

REFERENCE = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]


@pytest.fixture
def ref():
    return Tet(REFERENCE)


@pytest.fixture
def rng(request):
    # one stream per test, stable across runs
    return np.random.default_rng(sum(map(ord, request.node.name)))
