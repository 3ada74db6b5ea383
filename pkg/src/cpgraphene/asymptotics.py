"""Large-separation closed forms for Pi_00 at zero frequency and y = 1.

Every form shares the prefactor ``8 alpha k_B T / (v_F^2 hbar omega_c)``;
hyperbolic functions go through an overflow-safe ``log cosh``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .lifshitz import (IDEAL_METAL_REDUCED, STATIC, ForceResult,
                       PolarizabilityModel, _absolute)
from .polarization import GrapheneSheet, psi
from .units import Geometry, characteristic_energy, thermal_energy, thermal_parameter

__all__ = [
    "RegimeViolation",
    "AsymptoticRegime",
    "classify_regime",
    "log_cosh",
    "pi00_large_gap",
    "pi00_large_gap_unsimplified",
    "pi00_large_gap_undoped",
    "pi00_small_gap",
    "pi00_small_gap_undoped",
    "pi00_zero_gap",
    "pi00_pristine",
    "pi00_asymptotic",
    "force_asymptotic",
    "psi_expansion_check",
    "appendix_integral",
    "LARGE_GAP_D0",
    "SMALL_GAP_D0",
]

LARGE_GAP_D0 = 10.0
SMALL_GAP_D0 = 0.1
THERMAL_REFUSE = 1.0
THERMAL_WARN = 10.0


class RegimeViolation(ValueError):
    """The thermal parameter is too small for the large-separation expansions."""


@dataclass(frozen=True)
class AsymptoticRegime:
    tag: str
    d0: float
    thermal_param: float
    marginal: bool = False


def log_cosh(x):
    """ln cosh x without overflow."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)
    return out if out.ndim else float(out)


def _d0(sheet, g):
    return sheet.gap_delta / (sheet.fermi_ratio * characteristic_energy(g))


def _prefactor(sheet, g):
    c = g.constants
    return (8.0 * c.fine_structure * thermal_energy(g)
            / (sheet.fermi_ratio ** 2 * characteristic_energy(g)))


def _args(sheet, g):
    kT = thermal_energy(g)
    d, m = sheet.gap_delta, sheet.chem_potential_mu
    return (d + 2.0 * m) / (4.0 * kT), (d - 2.0 * m) / (4.0 * kT), d / (4.0 * kT)


def classify_regime(sheet: GrapheneSheet, g: Geometry) -> AsymptoticRegime:
    """Tag the expansion that applies, based on D_0 at y = 1.

    In the band 0.1 < D_0 < 10 the nearer threshold (logarithmically) wins
    and the result is flagged marginal.
    """
    d0 = _d0(sheet, g)
    theta = thermal_parameter(g, sheet)
    if sheet.gap_delta == 0:
        tag = "pristine" if sheet.chem_potential_mu == 0 else "zero_gap"
        return AsymptoticRegime(tag, d0, theta)
    if d0 >= LARGE_GAP_D0:
        return AsymptoticRegime("large_gap", d0, theta)
    if d0 <= SMALL_GAP_D0:
        return AsymptoticRegime("small_gap", d0, theta)
    geo_mid = math.sqrt(LARGE_GAP_D0 * SMALL_GAP_D0)
    tag = "large_gap" if d0 >= geo_mid else "small_gap"
    return AsymptoticRegime(tag, d0, theta, marginal=True)


def pi00_large_gap(sheet, g):
    """Two-term cosh/tanh form for D_0 >> 1."""
    xp, xm, _ = _args(sheet, g)
    quarter_gap = sheet.gap_delta / (4.0 * thermal_energy(g))
    bracket = (2.0 * math.log(2.0) + log_cosh(xp) + log_cosh(xm)
               - quarter_gap * (math.tanh(xp) + math.tanh(xm)))
    return _prefactor(sheet, g) * bracket


def pi00_large_gap_unsimplified(sheet, g):
    """Thermal log plus Fermi-weighted gap term, before the hyperbolic rewrite."""
    kT = thermal_energy(g)
    half_gap = sheet.gap_delta / (2.0 * kT)
    m = sheet.chem_potential_mu / kT
    log_term = np.logaddexp(-half_gap, m) + np.logaddexp(-half_gap, -m)
    fermi = expit(-(half_gap + m)) + expit(-(half_gap - m))
    c = g.constants
    hw = characteristic_energy(g)
    return (_prefactor(sheet, g) * log_term
            + 4.0 * c.fine_structure * sheet.gap_delta / (sheet.fermi_ratio ** 2 * hw) * fermi)


def pi00_large_gap_undoped(sheet, g):
    """mu = 0 specialisation of the large-gap form."""
    _, _, x = _args(sheet, g)
    return 2.0 * _prefactor(sheet, g) * (math.log(2.0) + log_cosh(x) - x * math.tanh(x))


def pi00_small_gap(sheet, g):
    """ln(4 cosh cosh) form, valid for D_0 << 1 and any mu."""
    xp, xm, _ = _args(sheet, g)
    return _prefactor(sheet, g) * (2.0 * math.log(2.0) + log_cosh(xp) + log_cosh(xm))


def pi00_small_gap_undoped(sheet, g):
    """mu = 0 small-gap form: 2 * prefactor * ln(2 cosh(Delta / 4kT))."""
    _, _, x = _args(sheet, g)
    return 2.0 * _prefactor(sheet, g) * (math.log(2.0) + log_cosh(x))


def pi00_zero_gap(sheet, g):
    """Delta = 0: prefactor * ln[(1 + e^m)(1 + e^-m)]."""
    m = sheet.chem_potential_mu / thermal_energy(g)
    return _prefactor(sheet, g) * (np.logaddexp(0.0, m) + np.logaddexp(0.0, -m))


def pi00_pristine(sheet, g):
    """Delta = mu = 0: 2 * prefactor * ln 2."""
    return 2.0 * _prefactor(sheet, g) * math.log(2.0)


def _check_thermal(theta):
    if theta < THERMAL_REFUSE:
        raise RegimeViolation(
            f"thermal parameter {theta:.3g} < {THERMAL_REFUSE}: expansion not applicable")
    if theta < THERMAL_WARN:
        warnings.warn(f"thermal parameter {theta:.3g} is not >> 1; asymptotic value is rough",
                      RuntimeWarning, stacklevel=3)


def pi00_asymptotic(sheet: GrapheneSheet, g: Geometry) -> float:
    """Closed-form Pi_00,0(1) for the regime returned by :func:`classify_regime`."""
    regime = classify_regime(sheet, g)
    _check_thermal(regime.thermal_param)
    if regime.tag == "pristine":
        return float(pi00_pristine(sheet, g))
    if regime.tag == "zero_gap":
        return float(pi00_zero_gap(sheet, g))
    if regime.tag == "large_gap":
        return float(pi00_large_gap(sheet, g))
    return float(pi00_small_gap(sheet, g))


def force_asymptotic(sheet: GrapheneSheet, g: Geometry,
                     pol: PolarizabilityModel = STATIC) -> ForceResult:
    """F_0^as = F_0^IM [1 - 8 / Pi_00,0(1)].

    No analytic error bar exists for this expansion; ``est_rel_error`` is NaN.
    """
    pi1 = pi00_asymptotic(sheet, g)
    reduced = IDEAL_METAL_REDUCED * (1.0 - 8.0 / pi1)
    return ForceResult(reduced, _absolute(reduced, g, pol), 1, math.nan, (reduced,))


def psi_expansion_check(d0: float) -> float:
    """Psi(d0) * 3 d0 / 8, which tends to 1 for large d0."""
    if not d0 > 0:
        raise ValueError("d0 must be positive")
    return float(psi(d0)) * 3.0 * d0 / 8.0


def appendix_integral(d0: float) -> float:
    """Closed form of int_{D0}^{sqrt(1+D0^2)} (1-u^2)/sqrt(1-u^2+D0^2) du."""
    if d0 < 0:
        raise ValueError("d0 must be non-negative")
    # arctan(d0) - pi/2 = -arctan(1/d0)
    return -0.5 * d0 - 0.5 * (d0 * d0 - 1.0) * math.atan2(1.0, d0)
