"""TM and TE reflection coefficients of graphene at imaginary frequencies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polarization import (GrapheneSheet, QuadratureConfig, TensorPoint,
                           pi00_zero_values, tensor_components)
from .units import Geometry

__all__ = [
    "ReflectionPair",
    "tm_from_tensor",
    "te_from_tensor",
    "r_tm_zero_from_pi",
    "r_tm_zero_complement",
    "reflection_at",
    "r_tm_zero",
]


@dataclass(frozen=True)
class ReflectionPair:
    r_tm: float
    r_te: float

    def __post_init__(self):
        if not 0.0 <= self.r_tm <= 1.0:
            raise ValueError(f"r_tm outside [0, 1]: {self.r_tm}")
        if not -1.0 <= self.r_te <= 0.0:
            raise ValueError(f"r_te outside [-1, 0]: {self.r_te}")


def tm_from_tensor(pi00, y, zeta):
    """r_TM from a given Pi_00 value.

    At ``y == zeta`` the coefficient is 1 for positive Pi_00 and 0 otherwise.
    """
    pi00, y = np.asarray(pi00, dtype=float), np.asarray(y, dtype=float)
    num = y * pi00
    den = num + 2.0 * (y - zeta) * (y + zeta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    out = np.where((y == zeta) & (pi00 > 0), 1.0, out)
    return out if out.ndim else float(out)


def te_from_tensor(pi, y, zeta):
    """r_TE from a given Pi_l value; -1 at ``y == zeta`` when Pi_l > 0."""
    pi, y = np.asarray(pi, dtype=float), np.asarray(y, dtype=float)
    den = pi + 2.0 * y * (y - zeta) * (y + zeta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, -pi / np.where(den > 0, den, 1.0), 0.0)
    out = np.where((y == zeta) & (pi > 0), -1.0, out)
    return out if out.ndim else float(out)


def r_tm_zero_from_pi(pi00, y):
    """Zero-frequency TM coefficient Pi / (Pi + 2y)."""
    pi00 = np.asarray(pi00, dtype=float)
    return pi00 / (pi00 + 2.0 * np.asarray(y, dtype=float))


def r_tm_zero_complement(pi00, y):
    """Same coefficient written as 1 - 2y / (Pi + 2y)."""
    y = np.asarray(y, dtype=float)
    return 1.0 - 2.0 * y / (np.asarray(pi00, dtype=float) + 2.0 * y)


def reflection_at(point: TensorPoint, sheet: GrapheneSheet, g: Geometry,
                  q: QuadratureConfig = QuadratureConfig()) -> ReflectionPair:
    """Both reflection coefficients at one (zeta_l, y).

    The TE coefficient is reported as 0 at zero frequency, where it carries a
    vanishing weight in the force.
    """
    if point.zeta_l == 0:
        return ReflectionPair(r_tm_zero(point.y, sheet, g, q), 0.0)
    tv = tensor_components(point.zeta_l, point.y, sheet, g, q)
    return ReflectionPair(float(tv.r_tm[0]), float(tv.r_te[0]))


def r_tm_zero(y: float, sheet: GrapheneSheet, g: Geometry,
              q: QuadratureConfig = QuadratureConfig()) -> float:
    values, _ = pi00_zero_values([y], sheet, g, q)
    return float(r_tm_zero_from_pi(values[0], y))
