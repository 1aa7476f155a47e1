import math

import pytest
from hypothesis import given, strategies as st

from bosetrap import units


def test_benchmark_trap_length():
    # b_t = sqrt(hbar/(m omega)) for 86.909 amu at 77.87 Hz
    sysm = units.paper_system()
    assert sysm.trap_length_au == pytest.approx(23094.3, rel=1e-5)


def test_benchmark_energy_quantum():
    sysm = units.paper_system()
    omega = 2.0 * math.pi * 77.87 * units.AU_TIME_S
    assert sysm.energy_quantum_au == omega
    assert sysm.mass_au == 86.909 * units.AMU_TO_AU


def test_make_system_validation():
    with pytest.raises(ValueError):
        units.make_system(-1.0, 77.87)
    with pytest.raises(ValueError):
        units.make_system(86.909, 0.0)


def test_length_conversion_definition():
    sysm = units.paper_system()
    assert units.to_oscillator(sysm.trap_length_au, "length", sysm) == 1.0
    assert units.to_oscillator(sysm.energy_quantum_au, "energy", sysm) == 1.0


def test_unknown_dimension():
    sysm = units.paper_system()
    with pytest.raises(ValueError):
        units.to_oscillator(1.0, "time", sysm)
    with pytest.raises(ValueError):
        units.from_oscillator(1.0, "mass", sysm)


@given(value=st.floats(min_value=1e-12, max_value=1e12),
       dim=st.sampled_from(["length", "energy"]))
def test_conversion_round_trip(value, dim):
    sysm = units.paper_system()
    back = units.to_oscillator(
        units.from_oscillator(value, dim, sysm), dim, sysm)
    assert back == pytest.approx(value, rel=1e-14)


@given(mass=st.floats(min_value=1.0, max_value=300.0),
       freq=st.floats(min_value=1.0, max_value=1e5))
def test_trap_length_scaling(mass, freq):
    # b_t ~ 1/sqrt(m nu): doubling the mass shrinks b_t by sqrt(2)
    s1 = units.make_system(mass, freq)
    s2 = units.make_system(2.0 * mass, freq)
    assert s2.trap_length_au == pytest.approx(
        s1.trap_length_au / math.sqrt(2.0), rel=1e-12)
