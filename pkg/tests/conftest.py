from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from free_stein.ncalg import BAlgebra, GeneratorSystem
from free_stein.quadrature import SemicircleDensity
from free_stein.trace import FreeProductModel, MatrixModel, MeasureModel, SemicircularModel

# Fixed seeds everywhere so property runs are reproducible
settings.register_profile("ci", derandomize=True, max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

SPECS = Path(__file__).resolve().parent.parent / "specs"

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


@pytest.fixture
def specs_dir():
    return SPECS


@pytest.fixture
def system1():
    return GeneratorSystem(1)


@pytest.fixture
def system2():
    return GeneratorSystem(2)


@pytest.fixture
def system3():
    return GeneratorSystem(3)


@pytest.fixture
def projection_algebra():
    # basis (1, e) with e = e* = e²
    return BAlgebra([[[1, 0], [0, 1]], [[0, 1], [0, 1]]], [[1, 0], [0, 1]], unit=0)


@pytest.fixture
def semicircular1():
    return SemicircularModel(1)


@pytest.fixture
def semicircular2():
    return SemicircularModel(2)


@pytest.fixture
def twopoint():
    return MeasureModel(atoms=[(-1.0, 0.5), (1.0, 0.5)])


@pytest.fixture
def threepoint():
    return MeasureModel(atoms=[(-1.0, 1 / 3), (0.0, 1 / 3), (1.0, 1 / 3)])


@pytest.fixture
def semicircle_measure():
    return MeasureModel(density=SemicircleDensity())


@pytest.fixture
def c2():
    return MatrixModel.diagonal([1.0, -1.0], [0.5, 0.5])


@pytest.fixture
def m2():
    return MatrixModel([(2, 1.0)], [[SIGMA_Z], [SIGMA_X]])


@pytest.fixture
def m2c():
    return MatrixModel([(2, 2 / 3), (1, 1 / 3)],
                       [[SIGMA_Z, np.array([[2]])], [SIGMA_X, np.array([[0]])]])


@pytest.fixture
def free_twopoint(twopoint):
    other = MeasureModel(atoms=[(-1.0, 0.5), (1.0, 0.5)])
    return FreeProductModel([twopoint, other])
