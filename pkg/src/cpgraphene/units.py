"""Physical constants and the dimensionless scales used by every other module.

External units: energies in eV, lengths in micrometres, temperatures in
kelvin.  CODATA-2018 values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CODATA2018",
    "Geometry",
    "characteristic_energy",
    "thermal_energy",
    "matsubara_zeta",
    "matsubara_energy",
    "thermal_parameter",
    "thermal_length",
    "EV_PER_UM_TO_NEWTON",
]

# 1 eV/um expressed in newtons
EV_PER_UM_TO_NEWTON = 1.602176634e-19 / 1e-6


@dataclass(frozen=True)
class PhysicalConstants:
    hbar_c: float = 0.1973269804          # eV um
    boltzmann: float = 8.617333262e-5     # eV / K
    fine_structure: float = 7.2973525693e-3
    default_fermi_ratio: float = 1.0 / 300.0

    def __post_init__(self):
        if not (self.hbar_c > 0 and self.boltzmann > 0):
            raise ValueError("hbar_c and boltzmann must be positive")
        if not 0.00729 < self.fine_structure < 0.00730:
            raise ValueError("fine_structure outside (0.00729, 0.00730)")
        if not 0.0 < self.default_fermi_ratio < 1.0:
            raise ValueError("default_fermi_ratio must lie in (0, 1)")


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class Geometry:
    """Particle-sheet separation (um) and temperature (K)."""

    separation_a: float
    temperature_T: float
    constants: PhysicalConstants = CODATA2018

    def __post_init__(self):
        if not (math.isfinite(self.separation_a) and self.separation_a > 0):
            raise ValueError(f"separation must be positive, got {self.separation_a}")
        if not (math.isfinite(self.temperature_T) and self.temperature_T > 0):
            raise ValueError(f"temperature must be positive, got {self.temperature_T}")

    @property
    def hbar_omega_c(self) -> float:
        return characteristic_energy(self)

    @property
    def kT(self) -> float:
        return thermal_energy(self)


def characteristic_energy(g: Geometry) -> float:
    """hbar * omega_c = hbar c / (2 a) in eV."""
    return g.constants.hbar_c / (2.0 * g.separation_a)


def thermal_energy(g: Geometry) -> float:
    """k_B T in eV."""
    return g.constants.boltzmann * g.temperature_T


def matsubara_zeta(l: int, g: Geometry) -> float:
    """Dimensionless Matsubara frequency zeta_l = xi_l / omega_c."""
    if l < 0:
        raise ValueError("Matsubara index must be non-negative")
    return 2.0 * math.pi * thermal_energy(g) * l / characteristic_energy(g)


def matsubara_energy(zeta: float, g: Geometry) -> float:
    """Inverse of the scaling: hbar * xi in eV for a dimensionless zeta."""
    return zeta * characteristic_energy(g)


def thermal_parameter(g: Geometry, sheet) -> float:
    """k_B T / (v_F/c * hbar omega_c); the large-separation expansions need it >> 1.

    ``sheet`` is a graphene sheet or a bare Fermi-velocity ratio.
    """
    fermi_ratio = float(getattr(sheet, "fermi_ratio", sheet))
    return thermal_energy(g) / (fermi_ratio * characteristic_energy(g))


def thermal_length(temperature_T: float, constants: PhysicalConstants = CODATA2018) -> float:
    """hbar c / (k_B T) in um."""
    return constants.hbar_c / (constants.boltzmann * temperature_T)
