"""Casimir-Polder force from the Lifshitz formula at finite temperature.

The force is reported through the reduced value

    phi = -8 a^4 F / (k_B T alpha_0) = sum'_l (alpha_l/alpha_0) K_l,

    K_l = int_{zeta_l}^inf y exp(-y) [(2y^2 - zeta_l^2) r_TM - zeta_l^2 r_TE] dy,

where the prime halves the l = 0 term.  An ideal metal gives phi = 6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .polarization import (GrapheneSheet, QuadratureConfig, pi00_zero_values,
                           tensor_components)
from .quadrature import QuadratureError, integrate_batch
from .reflection import r_tm_zero_from_pi
from .units import (EV_PER_UM_TO_NEWTON, Geometry, matsubara_energy,
                    matsubara_zeta, thermal_energy)

__all__ = [
    "PolarizabilityModel",
    "ForceResult",
    "MatsubaraNonconvergence",
    "ideal_metal_reflection",
    "term_l",
    "term_l_with_error",
    "force_total",
    "force_zero_term",
    "force_ideal_metal",
    "delta_f0",
    "IDEAL_METAL_REDUCED",
]

IDEAL_METAL_REDUCED = 6.0
# y-range beyond zeta_l kept in the integral: exp(-60) < 1e-26
Y_SPAN = 60.0

ReflectionModel = Callable[[float, np.ndarray], tuple]


class MatsubaraNonconvergence(QuadratureError):
    """The Matsubara sum reached ``matsubara_max_l`` without meeting the tail rule."""


@dataclass(frozen=True)
class PolarizabilityModel:
    """Particle polarizability at imaginary frequency.

    ``alpha0`` is the static value in um^3 (may be ``None`` when only reduced
    forces are wanted).  ``func`` maps an imaginary frequency hbar*xi in eV to
    a polarizability in um^3; when absent the model is static.
    """

    alpha0: Optional[float] = None
    func: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.alpha0 is not None and not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")

    @property
    def kind(self) -> str:
        return "static" if self.func is None else "user-supplied-function"

    def eval(self, energy_ev: float) -> float:
        if self.func is None:
            if self.alpha0 is None:
                return 1.0
            return self.alpha0
        value = float(self.func(energy_ev))
        if not value > 0:
            raise ValueError(f"polarizability must be positive, got {value}")
        return value

    def ratio(self, energy_ev: float) -> float:
        """alpha(i xi) / alpha(0)."""
        if self.func is None:
            return 1.0
        return self.eval(energy_ev) / self.eval(0.0)


STATIC = PolarizabilityModel()


@dataclass(frozen=True)
class ForceResult:
    reduced_force: float
    absolute_force: Optional[float]
    terms_used: int
    est_rel_error: float
    terms: tuple = field(default=(), repr=False)

    @property
    def zero_term_fraction(self) -> float:
        """Share of the l = 0 term in the total (F_0 / F)."""
        return self.terms[0] / self.reduced_force


def ideal_metal_reflection(zeta, y):
    y = np.asarray(y, dtype=float)
    return np.ones_like(y), -np.ones_like(y)


def _absolute(reduced, g, pol):
    if pol.alpha0 is None:
        return None
    a = g.separation_a
    return -thermal_energy(g) / (8.0 * a ** 4) * pol.alpha0 * reduced * EV_PER_UM_TO_NEWTON


def _tail_bound(zeta, upper):
    """Bound of int_upper^inf y e^-y (2y^2 + zeta^2) dy, relative to exp(-zeta)."""
    Y = upper
    poly = 2.0 * (Y ** 3 + 3 * Y ** 2 + 6 * Y + 6) + zeta ** 2 * (Y + 1)
    return math.exp(-(upper - zeta)) * poly


def term_l_with_error(l: int, sheet: GrapheneSheet, g: Geometry,
                      q: QuadratureConfig = QuadratureConfig(),
                      reflection: Optional[ReflectionModel] = None):
    """K_l and an absolute error bound (the l = 0 value is not halved)."""
    zeta = matsubara_zeta(l, g)
    rel_tol = 0.5 * q.rel_tol
    inner = {"rel": 0.0}

    if l == 0:
        def integrand(idx, y):
            if reflection is None:
                pi, err = pi00_zero_values(y, sheet, g, q)
                inner["rel"] = max(inner["rel"], float(np.max(err / np.maximum(pi, 1e-300))))
                r = r_tm_zero_from_pi(pi, y)
            else:
                r = np.asarray(reflection(0.0, y)[0], dtype=float)
            return 2.0 * y ** 3 * np.exp(-y) * r
        scale = 1.0
        lo = 0.0
    else:
        # y = zeta + t, exp(-zeta) factored out
        def integrand(idx, t):
            y = zeta + t
            if reflection is None:
                tv = tensor_components(zeta, y, sheet, g, q)
                inner["rel"] = max(inner["rel"], float(np.max(tv.rel_err)))
                r_tm, r_te = tv.r_tm, tv.r_te
            else:
                r_tm, r_te = (np.asarray(v, dtype=float) for v in reflection(zeta, y))
            return y * np.exp(-t) * ((2.0 * y * y - zeta * zeta) * r_tm - zeta * zeta * r_te)
        scale = math.exp(-zeta)
        lo = 0.0

    val, err = integrate_batch(integrand, [lo], [Y_SPAN], rel_tol=rel_tol,
                               abs_tol=q.abs_tol / scale if scale > 0 else 0.0,
                               max_panels=q.max_panels, initial_panels=4)
    value = float(val[0, 0])
    error = float(err[0, 0]) + inner["rel"] * abs(value) + _tail_bound(zeta, zeta + Y_SPAN)
    return value * scale, error * scale


def term_l(l: int, sheet: GrapheneSheet, g: Geometry,
           q: QuadratureConfig = QuadratureConfig(),
           reflection: Optional[ReflectionModel] = None) -> float:
    """Matsubara term K_l of the reduced force (l = 0 not halved)."""
    return term_l_with_error(l, sheet, g, q, reflection)[0]


def force_total(sheet: GrapheneSheet, g: Geometry,
                pol: PolarizabilityModel = STATIC,
                q: QuadratureConfig = QuadratureConfig(),
                reflection: Optional[ReflectionModel] = None) -> ForceResult:
    """Full Matsubara sum.

    Terms are added in order l = 0, 1, 2, ... until ``consecutive_small``
    successive terms each fall below ``matsubara_rel_tail`` of the running
    sum.  ``terms`` holds the weighted, halved-at-zero contributions.
    """
    terms = []
    total = 0.0
    abs_err = 0.0
    small = 0
    for l in range(q.matsubara_max_l + 1):
        weight = 0.5 if l == 0 else 1.0
        zeta = matsubara_zeta(l, g)
        weight *= pol.ratio(matsubara_energy(zeta, g))
        value, err = term_l_with_error(l, sheet, g, q, reflection)
        contribution = weight * value
        terms.append(contribution)
        total += contribution
        abs_err += abs(weight) * err
        if l > 0 and abs(contribution) < q.matsubara_rel_tail * abs(total):
            small += 1
        else:
            small = 0
        if small >= q.consecutive_small:
            break
    else:
        raise MatsubaraNonconvergence(
            f"Matsubara sum not converged at l = {q.matsubara_max_l}",
            total, abs_err)

    # geometric estimate of the omitted tail
    if len(terms) >= 2 and terms[-2] != 0:
        ratio = abs(terms[-1] / terms[-2])
        if ratio < 1:
            abs_err += abs(terms[-1]) * ratio / (1.0 - ratio)
    rel = abs_err / abs(total) if total else math.inf
    return ForceResult(total, _absolute(total, g, pol), len(terms), rel, tuple(terms))


def force_zero_term(sheet: GrapheneSheet, g: Geometry,
                    pol: PolarizabilityModel = STATIC,
                    q: QuadratureConfig = QuadratureConfig(),
                    reflection: Optional[ReflectionModel] = None) -> ForceResult:
    """Zero-frequency contribution F_0 alone."""
    value, err = term_l_with_error(0, sheet, g, q, reflection)
    reduced = 0.5 * value
    rel = err / value if value else math.inf
    return ForceResult(reduced, _absolute(reduced, g, pol), 1, rel, (reduced,))


def force_ideal_metal(g: Geometry, pol: PolarizabilityModel) -> float:
    """Classical-limit force -3 k_B T alpha_0 / (4 a^4) in newtons."""
    if pol.alpha0 is None:
        raise ValueError("absolute force needs a static polarizability alpha0")
    return _absolute(IDEAL_METAL_REDUCED, g, pol)


def delta_f0(sheet: GrapheneSheet, g: Geometry,
             q: QuadratureConfig = QuadratureConfig()) -> float:
    """Relative deviation (F_0 - F_0^IM) / F_0^IM."""
    f0 = force_zero_term(sheet, g, STATIC, q)
    return f0.reduced_force / IDEAL_METAL_REDUCED - 1.0
