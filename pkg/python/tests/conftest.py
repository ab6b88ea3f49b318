"""Shared configurations with closed-form spectra."""

import numpy as np
import pytest
from dirac_spectra import (
    CharContext,
    ComplexPolynomial,
    GridConfig,
    LinearBC,
    QuadraticBC,
    ScalarFunction,
    SeparatedBC,
    SystemSpec,
)


@pytest.fixture
def quadratic_bc():
    """(y1(0)+y2(0))² = 0 and (y1(½)+y2(½))² = 0."""
    row1 = [0.0] * 10
    row1[0] = row1[1] = 1.0
    row1[4] = 2.0
    row2 = [0.0] * 10
    row2[2] = row2[3] = 1.0
    row2[9] = 2.0
    return QuadraticBC((row1, row2))


@pytest.fixture
def grid():
    return GridConfig()


@pytest.fixture
def coarse_grid():
    return GridConfig(n_points=129)


@pytest.fixture
def free_spec():
    """a = -1, b = 1 with Q = M = 0."""
    return SystemSpec(-1.0, 1.0)


@pytest.fixture
def trig_spec():
    """Smooth trigonometric potential."""
    return SystemSpec(
        -1.0,
        1.0,
        q1=ScalarFunction.cos(2.0, 0.5) + ScalarFunction.constant(0.2),
        q2=ScalarFunction.sin(3.0, 0.4),
    )


@pytest.fixture
def ones_bc():
    return SeparatedBC.constants(1.0, 1.0)


@pytest.fixture
def free_ctx(free_spec, ones_bc, grid):
    return CharContext(free_spec, ones_bc, grid)


@pytest.fixture
def quadratic_ctx(free_spec, quadratic_bc, grid):
    return CharContext(free_spec, quadratic_bc, grid)


@pytest.fixture
def random_linear_bc():
    """Degree <= 2 polynomial entries with fixed seed."""
    rng = np.random.default_rng(7)
    rows = []
    for _ in range(2):
        row = []
        for _ in range(4):
            coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
            row.append(ComplexPolynomial(tuple(coeffs)))
        rows.append(tuple(row))
    return LinearBC(tuple(rows))
