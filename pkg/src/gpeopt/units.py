"""Unit system and physical constants.

All numerics in this package run in dimensionless units: lengths are
measured in a reference length l0, time in t0 = m*l0**2/hbar, and energies
in hbar/t0.  In these units the single-particle Hamiltonian reads
-1/2*Laplace + V and the nonlinearity constant is g = 4*pi*N*a_s/l0.
Configuration files state physical quantities; conversion happens here and
nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar as HBAR  # J s
from scipy.constants import h as H_PLANCK  # J s
from scipy.constants import physical_constants

BOHR_MAGNETON = physical_constants["Bohr magneton"][0]  # J / T

# Default atom: 87Rb in the |F=2, mF=2> hyperfine ground state.
RB87_MASS = 1.44e-25  # kg
RB87_SCATTERING_LENGTH = 5.24e-9  # m


@dataclass(frozen=True)
class UnitSystem:
    """Dimensionless unit system for a given atom and reference length.

    Attributes
    ----------
    mass : float
        Atomic mass in kg.
    length_unit : float
        Reference length l0 in meters.
    time_unit : float
        t0 = m*l0**2/hbar in seconds.
    g : float
        Dimensionless interaction constant 4*pi*N*a_s/l0.
    atom_count : int
        Particle number N the wave function is normalized for.
    """

    mass: float
    length_unit: float
    time_unit: float
    g: float
    atom_count: int

    @property
    def energy_unit(self) -> float:
        """Energy scale hbar/t0 in joules."""
        return HBAR / self.time_unit

    def omega_to_dimless(self, omega_rad_s: float) -> float:
        """Angular frequency in rad/s to dimensionless (units of 1/t0)."""
        return omega_rad_s * self.time_unit

    def omega_from_dimless(self, omega: float) -> float:
        """Dimensionless angular frequency back to rad/s."""
        return omega / self.time_unit

    def time_to_dimless(self, t_s: float) -> float:
        return t_s / self.time_unit

    def time_from_dimless(self, t: float) -> float:
        return t * self.time_unit

    def energy_hz_to_dimless(self, f_hz: float) -> float:
        """Energy given as h*f (f in Hz) to dimensionless units."""
        return 2.0 * np.pi * f_hz * self.time_unit


def dimensionless_units(
    atom_count: int,
    scattering_length: float = RB87_SCATTERING_LENGTH,
    mass: float = RB87_MASS,
    length_unit: float = 1e-6,
) -> UnitSystem:
    """Build the dimensionless unit system for a condensate.

    Parameters
    ----------
    atom_count : int
        Particle number N.
    scattering_length : float
        s-wave scattering length in meters.
    mass : float
        Atomic mass in kg.
    length_unit : float
        Reference length l0 in meters (default 1 micron).

    Returns
    -------
    UnitSystem
        With g = 4*pi*N*a_s/l0 and t0 = m*l0**2/hbar.
    """
    if atom_count <= 0:
        raise ValueError("atom_count must be positive")
    if length_unit <= 0 or mass <= 0:
        raise ValueError("length_unit and mass must be positive")
    t0 = mass * length_unit**2 / HBAR
    g = 4.0 * np.pi * atom_count * scattering_length / length_unit
    return UnitSystem(
        mass=mass,
        length_unit=length_unit,
        time_unit=t0,
        g=g,
        atom_count=atom_count,
    )


def angular_frequency(value_hz: float, angular: bool) -> float:
    """Interpret a configured frequency as angular frequency in rad/s.

    ``angular=True`` means the number already is an angular frequency
    (rad/s); ``angular=False`` means an ordinary frequency that gets a
    factor of 2*pi.
    """
    return value_hz if angular else 2.0 * np.pi * value_hz
