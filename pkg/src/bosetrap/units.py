"""Physical system definition and unit conversions.

All solver modules work in dimensionless oscillator units: lengths in
units of the trap length b_t = sqrt(hbar/(m*omega)) and energies in units
of hbar*omega.  Physical (atomic-unit) quantities appear only at the I/O
boundary, converted through a PhysicalSystem instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 values, compiled in for bit-for-bit reproducible conversions.
AMU_TO_AU = 1822.888486209      # electron masses per unified atomic mass unit
AU_TIME_S = 2.4188843265857e-17  # seconds per atomic unit of time
HBAR_AU = 1.0                    # hbar in Hartree atomic units


@dataclass(frozen=True)
class PhysicalSystem:
    """Trapped-boson system: particle mass and spherical trap frequency.

    Attributes
    ----------
    mass_amu : particle mass in atomic mass units
    freq_hz : trap frequency nu in Hz (omega = 2*pi*nu)
    mass_au : mass in atomic units (electron masses)
    omega_au : angular frequency in inverse atomic time units
    trap_length_au : b_t = sqrt(hbar/(m*omega)) in bohr
    energy_quantum_au : hbar*omega in hartree
    """

    mass_amu: float
    freq_hz: float
    mass_au: float
    omega_au: float
    trap_length_au: float
    energy_quantum_au: float


def make_system(mass_amu: float, freq_hz: float) -> PhysicalSystem:
    """Build a PhysicalSystem from mass (amu) and trap frequency (Hz)."""
    if mass_amu <= 0:
        raise ValueError(f"mass must be positive, got {mass_amu} amu")
    if freq_hz <= 0:
        raise ValueError(f"frequency must be positive, got {freq_hz} Hz")
    mass_au = mass_amu * AMU_TO_AU
    omega_au = 2.0 * math.pi * freq_hz * AU_TIME_S
    trap_length_au = math.sqrt(HBAR_AU / (mass_au * omega_au))
    energy_quantum_au = HBAR_AU * omega_au
    return PhysicalSystem(
        mass_amu=mass_amu,
        freq_hz=freq_hz,
        mass_au=mass_au,
        omega_au=omega_au,
        trap_length_au=trap_length_au,
        energy_quantum_au=energy_quantum_au,
    )


def paper_system() -> PhysicalSystem:
    """The 87Rb benchmark system: m = 86.909 amu, omega = 2*pi*77.87 Hz."""
    return make_system(86.909, 77.87)


def to_oscillator(value_au: float, dimension: str, system: PhysicalSystem) -> float:
    """Convert a length (bohr) or energy (hartree) to oscillator units."""
    if dimension == "length":
        return value_au / system.trap_length_au
    if dimension == "energy":
        return value_au / system.energy_quantum_au
    raise ValueError(f"unknown dimension {dimension!r}, expected 'length' or 'energy'")


def from_oscillator(value: float, dimension: str, system: PhysicalSystem) -> float:
    """Inverse of to_oscillator."""
    if dimension == "length":
        return value * system.trap_length_au
    if dimension == "energy":
        return value * system.energy_quantum_au
    raise ValueError(f"unknown dimension {dimension!r}, expected 'length' or 'energy'")
