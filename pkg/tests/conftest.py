import numpy as np
import pytest

from bedsim.grid import GridSpec, PressureMap
from bedsim.plant import ActuatorBank, PlantConfig, get_profile, solve_equilibrium


@pytest.fixture
def grid():
    return GridSpec()


@pytest.fixture
def adult_profile():
    return get_profile("adult_supine_80")


@pytest.fixture
def canonical_forces(adult_profile):
    """Equilibrium force map for the 80 kgf supine body at neutral extensions."""
    bank = ActuatorBank.at_extension(adult_profile.grid, 20.0)
    _, forces = solve_equilibrium(adult_profile, bank, PlantConfig())
    return forces


def pressure_map(values, grid=None):
    values = np.asarray(values, dtype=float)
    return PressureMap(grid or GridSpec(*values.shape), values)
