"""Casimir-Polder force between a polarizable particle and gapped, doped graphene.

The package evaluates the finite-temperature Lifshitz formula with the
polarization tensor of a graphene sheet, its zero-frequency term, the
large-separation closed forms, and parameter scans built on top of them.
"""
__version__ = "0.1.0"

from .units import (CODATA2018, Geometry, PhysicalConstants, characteristic_energy,
                    matsubara_zeta, thermal_energy, thermal_length, thermal_parameter)
from .quadrature import QuadratureError
from .polarization import (GrapheneSheet, QuadratureConfig, TensorPoint,
                           dielectric_functions, pi00, pi00_zero, pi_combo, psi,
                           tensor_point)
from .reflection import ReflectionPair, r_tm_zero, reflection_at
from .lifshitz import (STATIC, ForceResult, MatsubaraNonconvergence,
                       PolarizabilityModel, delta_f0, force_ideal_metal,
                       force_total, force_zero_term, term_l)
from .asymptotics import (AsymptoticRegime, RegimeViolation, classify_regime,
                          force_asymptotic, pi00_asymptotic)
from .analysis import (BracketError, CurveTable, ScanSpec, find_a0,
                       scan_a0_vs_gap, scan_delta_f0, scan_exact_vs_asymptotic)

__all__ = [
    "__version__",
    "CODATA2018", "Geometry", "PhysicalConstants", "characteristic_energy",
    "matsubara_zeta", "thermal_energy", "thermal_length", "thermal_parameter",
    "QuadratureError",
    "GrapheneSheet", "QuadratureConfig", "TensorPoint", "dielectric_functions",
    "pi00", "pi00_zero", "pi_combo", "psi", "tensor_point",
    "ReflectionPair", "r_tm_zero", "reflection_at",
    "STATIC", "ForceResult", "MatsubaraNonconvergence", "PolarizabilityModel",
    "delta_f0", "force_ideal_metal", "force_total", "force_zero_term", "term_l",
    "AsymptoticRegime", "RegimeViolation", "classify_regime", "force_asymptotic",
    "pi00_asymptotic",
    "BracketError", "CurveTable", "ScanSpec", "find_a0", "scan_a0_vs_gap",
    "scan_delta_f0", "scan_exact_vs_asymptotic",
]
