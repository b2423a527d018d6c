from fractions import Fraction

import pytest

from trapkit.graph import cycle, grid, path
from trapkit.mbqc import Computation, MeasurementPattern
from trapkit.states import ProductState
from trapkit.traps import Embedding, TrappifiedScheme, build_standard_trap

PENTAGON_PAIRS = [(0, 2), (1, 3), (2, 4), (0, 3), (1, 4)]


def line_computation(angles=(4, 0, 0), flip=0.0) -> Computation:
    """Classical-output 3-vertex line read out on vertex 2."""
    g = path(3).with_io(inputs=(), outputs=())
    p = MeasurementPattern.from_flow(g, dict(enumerate(angles)), {0: 1, 1: 2})
    return Computation(p, ProductState({}), (2,), flip)


@pytest.fixture
def pentagon():
    g = cycle(5)
    return TrappifiedScheme.uniform([build_standard_trap(g, h) for h in PENTAGON_PAIRS])


@pytest.fixture
def colouring_scheme():
    g = cycle(5)
    return TrappifiedScheme.uniform([build_standard_trap(g, h) for h in ([0, 2], [1, 3], [4])])


@pytest.fixture
def grid_scheme():
    host = grid(4, 3)
    canvases = [build_standard_trap(host, [0]), build_standard_trap(host, [4])]
    return TrappifiedScheme.uniform(canvases, Embedding("dummy-isolated", 4, 3))


@pytest.fixture
def line():
    return line_computation()


def half():
    return Fraction(1, 2)
