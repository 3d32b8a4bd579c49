"""Shared fixtures: small grids and one eligible parameter set."""
import math
from fractions import Fraction

import numpy as np
import pytest

from wavelab.core.exponents import Params
from wavelab.core.grid import Field, GridSpec, SpectralGrid
from wavelab.core.propagator import PropagatorPlan


@pytest.fixture
def radial():
    """Radial line, L = 40, n = 128."""
    return SpectralGrid(GridSpec("radial1d", 128, 40.0))


@pytest.fixture
def radial_fine():
    return SpectralGrid(GridSpec("radial1d", 256, 40.0))


@pytest.fixture
def box():
    """2*pi periodic cube, n = 16, so wavenumbers are integers."""
    return SpectralGrid(GridSpec("full3d", 16, 2 * math.pi))


@pytest.fixture
def box_plan(box):
    return PropagatorPlan(box)


@pytest.fixture
def params():
    return Params(Fraction(1, 2), Fraction(1, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian(sgrid: SpectralGrid, width: float = 1.0, amplitude: float = 1.0) -> Field:
    return Field(sgrid.spec, amplitude * np.exp(-((sgrid.radius / width) ** 2)))


def box_mode(box: SpectralGrid, kx: int, ky: int = 0, kz: int = 0) -> Field:
    x, y, z = box.coords
    return Field(box.spec, np.cos(kx * x + ky * y + kz * z))
