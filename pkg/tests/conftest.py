import pytest

from varentropy_lab import (
    OUBenchmark,
    double_well_drift,
    gaussian_density,
    invariant_density,
    make_uniform_grid,
)


@pytest.fixture(scope="session")
def wide_grid():
    """Reference grid for the exactly solvable benchmark."""
    return make_uniform_grid(-8.0, 8.0, 801)


@pytest.fixture(scope="session")
def bench():
    return OUBenchmark(0.25)


@pytest.fixture(scope="session")
def ou_model(bench):
    return bench.model()


@pytest.fixture(scope="session")
def ou_stationary(wide_grid, ou_model):
    return invariant_density(ou_model, wide_grid)


@pytest.fixture(scope="session")
def narrow_gaussian(wide_grid):
    """Centered Gaussian with variance 1/4 on the reference grid."""
    return gaussian_density(wide_grid, 0.0, 0.25)


@pytest.fixture(scope="session")
def dw_model():
    return double_well_drift(sigma=1.0)


@pytest.fixture(scope="session")
def dw_grid():
    return make_uniform_grid(-3.5, 3.5, 701)


@pytest.fixture(scope="session")
def dw_stationary(dw_model, dw_grid):
    return invariant_density(dw_model, dw_grid)
