"""Shared fixtures: the benchmark physical system and tuned wells."""

import pytest

from bosetrap import twobody, units
from bosetrap.matelem import GaussianPairModel

WELL_RANGE_AU = 11.65


@pytest.fixture(scope="session")
def system():
    return units.paper_system()


@pytest.fixture(scope="session")
def mu(system):
    return system.mass_au / 2.0


@pytest.fixture(scope="session")
def well_a100(system, mu):
    """Gaussian well tuned to a = 100 au on the one-bound-state branch."""
    return twobody.tune_strength(WELL_RANGE_AU, 100.0, mu)


def gaussian_model(system, well) -> GaussianPairModel:
    """Oscillator-unit pair model for a Gaussian well."""
    return GaussianPairModel(
        v0=well.V0 / system.energy_quantum_au,
        c=(system.trap_length_au / well.b) ** 2)
