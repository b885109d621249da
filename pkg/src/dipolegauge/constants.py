"""Physical constants (CODATA 2018, SI) and frequency/wavelength conversions.

Everything downstream works in SI; eV and atomic-unit values are plain
conversion helpers.  Values are hardcoded rather than pulled from
scipy.constants so results do not shift with the CODATA revision shipped
by the installed scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 base values
SPEED_OF_LIGHT = 299792458.0  # m/s, exact
PLANCK = 6.62607015e-34  # J*s, exact
HBAR = PLANCK / (2.0 * math.pi)  # J*s
ELEMENTARY_CHARGE = 1.602176634e-19  # C, exact
ELECTRON_MASS = 9.1093837015e-31  # kg
FINE_STRUCTURE = 7.2973525693e-3  # dimensionless
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg


@dataclass(frozen=True)
class PhysicalConstants:
    """Base constants plus the derived atomic-scale quantities.

    Derived fields are computed from the base values, not quoted, so the
    identities a0 = hbar/(m_e c alpha), hartree = e^2/(4 pi eps0 a0) and
    rydberg = hartree/2 hold by construction.
    """

    c: float  # speed of light (m/s)
    hbar: float  # reduced Planck constant (J*s)
    eps0: float  # vacuum permittivity (F/m)
    e_charge: float  # elementary charge (C)
    m_e: float  # electron mass (kg)
    alpha: float  # fine-structure constant
    a0: float  # Bohr radius (m)
    hartree: float  # Hartree energy (J)
    rydberg: float  # Rydberg energy (J)


def derived_constants() -> PhysicalConstants:
    """Assemble the shared constant set with derived fields computed."""
    a0 = HBAR / (ELECTRON_MASS * SPEED_OF_LIGHT * FINE_STRUCTURE)
    hartree = ELEMENTARY_CHARGE**2 / (4.0 * math.pi * VACUUM_PERMITTIVITY * a0)
    return PhysicalConstants(
        c=SPEED_OF_LIGHT,
        hbar=HBAR,
        eps0=VACUUM_PERMITTIVITY,
        e_charge=ELEMENTARY_CHARGE,
        m_e=ELECTRON_MASS,
        alpha=FINE_STRUCTURE,
        a0=a0,
        hartree=hartree,
        rydberg=hartree / 2.0,
    )


CONSTANTS = derived_constants()

BOHR_RADIUS = CONSTANTS.a0  # m
HARTREE = CONSTANTS.hartree  # J
RYDBERG = CONSTANTS.rydberg  # J


def hydrogen_wavenumber() -> float:
    """Characteristic wavenumber of the strongest hydrogen transition (1/m).

    The transition energy (3/8) m_e c^2 alpha^2 divided by hbar*c reduces
    to 3*alpha/(8*a0); the matching wavelength is the 121.5 nm line.
    """
    return 3.0 * FINE_STRUCTURE / (8.0 * BOHR_RADIUS)


def wavelength_to_omega(lam: float) -> float:
    """Vacuum wavelength (m) -> angular frequency (rad/s)."""
    if lam <= 0.0:
        raise ValueError(f"wavelength must be positive, got {lam}")
    return 2.0 * math.pi * SPEED_OF_LIGHT / lam


def omega_to_wavelength(omega: float) -> float:
    """Angular frequency (rad/s) -> vacuum wavelength (m)."""
    if omega <= 0.0:
        raise ValueError(f"angular frequency must be positive, got {omega}")
    return 2.0 * math.pi * SPEED_OF_LIGHT / omega


def joule_to_ev(energy: float) -> float:
    return energy / ELEMENTARY_CHARGE


def ev_to_joule(energy_ev: float) -> float:
    return energy_ev * ELEMENTARY_CHARGE
