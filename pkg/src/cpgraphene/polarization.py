"""Polarization tensor of gapped, doped graphene at imaginary Matsubara frequencies.

All quantities are dimensionless.  For a Matsubara frequency ``zeta`` and a
wave variable ``y >= zeta`` the two tensor components that enter the
reflection coefficients are returned in factored form::

    Pi_00 = alpha (y^2 - zeta^2) / p * P00
    Pi    = alpha (y^2 - zeta^2) * p * Ppi

where ``P00 = Psi(D) + 4 J00`` and ``Ppi = Psi(D) + 4 Jpi`` with ``J00``,
``Jpi`` integrals of the Fermi weight over ``u >= D``.  The thermal
logarithm of the closed form equals ``(4 alpha p / v_F^2) * int w du`` and is
absorbed into the integrands, which removes a cancellation of order
``k_B T / (v_F^2 hbar omega_c)`` between the log term and the integral.

At ``zeta = 0`` the reduced form with a finite integration range is used
(:func:`pi00_zero`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .quadrature import QuadratureError, integrate_batch
from .units import Geometry, characteristic_energy, thermal_energy

__all__ = [
    "GrapheneSheet",
    "QuadratureConfig",
    "TensorPoint",
    "tensor_point",
    "psi",
    "fermi_weight",
    "thermal_log",
    "TensorValues",
    "tensor_components",
    "pi00_zero_values",
    "pi00",
    "pi_combo",
    "pi00_zero",
    "dielectric_functions",
]

# B u - mu/kT above this: both Fermi factors < 1e-20
FERMI_CUTOFF = 46.0


@dataclass(frozen=True)
class GrapheneSheet:
    """Energy gap and chemical potential in eV, Fermi velocity in units of c."""

    gap_delta: float = 0.0
    chem_potential_mu: float = 0.0
    fermi_ratio: float = 1.0 / 300.0

    def __post_init__(self):
        if not (math.isfinite(self.gap_delta) and self.gap_delta >= 0):
            raise ValueError(f"gap must be >= 0 eV, got {self.gap_delta}")
        if not (math.isfinite(self.chem_potential_mu) and self.chem_potential_mu >= 0):
            raise ValueError(f"chemical potential must be >= 0 eV, got {self.chem_potential_mu}")
        if not 0.0 < self.fermi_ratio < 1.0:
            raise ValueError(f"fermi_ratio must lie in (0, 1), got {self.fermi_ratio}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and truncation policy for every integral and the Matsubara sum."""

    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    max_panels: int = 2000
    matsubara_rel_tail: float = 1e-10
    matsubara_max_l: int = 5000
    consecutive_small: int = 3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_panels < 10:
            raise ValueError("max_panels must be at least 10")
        if not self.matsubara_rel_tail > 0:
            raise ValueError("matsubara_rel_tail must be positive")
        if self.matsubara_max_l < 1:
            raise ValueError("matsubara_max_l must be at least 1")
        if self.consecutive_small < 1:
            raise ValueError("consecutive_small must be at least 1")


@dataclass(frozen=True)
class TensorPoint:
    zeta_l: float
    y: float
    p_l: float
    D_l: float
    B_l: float


def tensor_point(zeta: float, y: float, sheet: GrapheneSheet, g: Geometry) -> TensorPoint:
    """Build a validated evaluation point with the derived scales p_l, D_l, B_l."""
    if zeta < 0:
        raise ValueError("zeta must be non-negative")
    if y < zeta:
        raise ValueError(f"y must satisfy y >= zeta (y={y}, zeta={zeta})")
    if y <= 0:
        raise ValueError("y must be positive")
    p, D, B = _scales(zeta, np.float64(y), sheet, g)
    return TensorPoint(float(zeta), float(y), float(p), float(D), float(B))


def _scales(zeta, y, sheet, g):
    vf2 = sheet.fermi_ratio ** 2
    hw = characteristic_energy(g)
    p = np.sqrt(vf2 * y * y + (1.0 - vf2) * zeta * zeta)
    D = sheet.gap_delta / (hw * p)
    B = hw * p / (2.0 * thermal_energy(g))
    return p, D, B


def psi(x):
    """Psi(x) = 2 [x + (1 - x^2) arctan(1/x)], with Psi(0) = pi.

    Large arguments use the series in 1/x to avoid cancellation.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("psi is defined for x >= 0")
    out = np.empty_like(x)
    small = x < 8.0
    xs = x[small]
    out[small] = 2.0 * (xs + (1.0 - xs * xs) * np.arctan2(1.0, xs))
    t = 1.0 / x[~small]
    t2 = t * t
    # x - x^2 arctan(1/x) + arctan(1/x) with arctan(t) = sum (-1)^k t^(2k+1)/(2k+1):
    # Psi/2 = sum_{k>=1} (-1)^(k+1) t^(2k-1) [1/(2k+1) + 1/(2k-1)]
    acc = np.zeros_like(t)
    for k in range(14, 0, -1):
        coef = (-1) ** (k + 1) * (1.0 / (2 * k + 1) + 1.0 / (2 * k - 1))
        acc = acc * t2 + coef
    out[~small] = 2.0 * t * acc
    return out if out.ndim else float(out)


def fermi_weight(u, B, mu_over_kT):
    """w = 1/(exp(B u + mu/kT) + 1) + 1/(exp(B u - mu/kT) + 1), overflow-safe."""
    bu = np.asarray(B, dtype=float) * np.asarray(u, dtype=float)
    out = expit(-(bu + mu_over_kT)) + expit(-(bu - mu_over_kT))
    return out if np.ndim(out) else float(out)


def thermal_log(half_gap_over_kT, mu_over_kT):
    """ln[(exp(-Delta/2kT) + exp(mu/kT)) (exp(-Delta/2kT) + exp(-mu/kT))]."""
    return (np.logaddexp(-half_gap_over_kT, mu_over_kT)
            + np.logaddexp(-half_gap_over_kT, -mu_over_kT))


@dataclass(frozen=True)
class TensorValues:
    """Factored tensor values on a grid of y at one Matsubara frequency.

    ``pi00`` and ``pi`` are the dimensionless tensor components; ``r_tm`` and
    ``r_te`` the reflection coefficients built from them; ``rel_err`` bounds
    the relative error of the reduced factors ``P00`` and ``Ppi``.
    """

    zeta: float
    y: np.ndarray
    p: np.ndarray
    P00: np.ndarray
    Ppi: np.ndarray
    rel_err: np.ndarray
    alpha: float

    @property
    def pi00(self):
        return self.alpha * (self.y ** 2 - self.zeta ** 2) / self.p * self.P00

    @property
    def pi(self):
        return self.alpha * (self.y ** 2 - self.zeta ** 2) * self.p * self.Ppi

    @property
    def r_tm(self):
        x = self.alpha * self.y * self.P00
        return x / (x + 2.0 * self.p)

    @property
    def r_te(self):
        x = self.alpha * self.p * self.Ppi
        return -x / (x + 2.0 * self.y)


def tensor_components(zeta, y, sheet, g, q=QuadratureConfig(), rel_tol=None):
    """Evaluate both tensor components at ``zeta > 0`` for an array of ``y``.

    Raises
    ------
    QuadratureError
        If an inner integral fails to converge; ``estimate`` holds the
        best available values of ``(J00, Jpi)``.
    """
    if not zeta > 0:
        raise ValueError("tensor_components needs zeta > 0; use pi00_zero for zeta = 0")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y < zeta):
        raise ValueError("all y must satisfy y >= zeta")
    rel_tol = 0.1 * q.rel_tol if rel_tol is None else rel_tol
    c = g.constants
    vf = sheet.fermi_ratio
    kT = thermal_energy(g)
    m = sheet.chem_potential_mu / kT

    p, D, B = _scales(zeta, y, sheet, g)
    kappa = zeta / p
    eps = vf * vf * (y - zeta) * (y + zeta) / (p * p)
    ustar = np.sqrt(1.0 + eps * D * D)
    U = (FERMI_CUTOFF + m) / B
    base = psi(D)

    # Integration segments in s in [0, 1]: u = u0 + sign * L * s^2
    seg_owner, seg_u0, seg_L, seg_sign, seg_gapD, seg_gapS = [], [], [], [], [], []
    for i in range(y.size):
        if U[i] <= D[i]:
            continue
        if D[i] < ustar[i] < U[i]:
            seg_owner += [i, i]
            seg_u0 += [ustar[i], ustar[i]]
            seg_L += [ustar[i] - D[i], U[i] - ustar[i]]
            seg_sign += [-1.0, 1.0]
            seg_gapD += [ustar[i] - D[i], ustar[i] - D[i]]
            seg_gapS += [0.0, 0.0]
        else:
            seg_owner.append(i)
            seg_u0.append(D[i])
            seg_L.append(U[i] - D[i])
            seg_sign.append(1.0)
            seg_gapD.append(0.0)
            seg_gapS.append(ustar[i] - D[i])

    J = np.zeros((2, y.size))
    Jerr = np.zeros((2, y.size))
    if seg_owner:
        seg_owner = np.array(seg_owner)
        seg_u0, seg_L, seg_sign = map(np.array, (seg_u0, seg_L, seg_sign))
        seg_gapD, seg_gapS = np.array(seg_gapD), np.array(seg_gapS)
        sD, sB, sk, sus = (D[seg_owner], B[seg_owner], kappa[seg_owner],
                           ustar[seg_owner])

        def integrand(idx, s):
            L = seg_L[idx]
            sg = seg_sign[idx]
            d = sg * L * s * s
            u = seg_u0[idx] + d
            gap_d = seg_gapD[idx] + d
            gap_s = seg_gapS[idx] - d
            Dl = sD[idx]
            kap = sk[idx]
            S2 = gap_s * (sus[idx] + u) + 2j * kap * u
            S = np.sqrt(S2)
            A = 1.0 + 1j * kap * u
            t1 = (gap_d * (u + Dl) / (A + S)).real
            t2 = (1.0 / S).real
            w = expit(-(sB[idx] * u + m)) + expit(-(sB[idx] * u - m))
            jac = 2.0 * L * s * w
            return np.stack([(t1 + Dl * Dl * t2) * jac, (1.0 - t2 - t1) * jac])

        # share the reference magnitude between the segments of one y
        nseg = np.bincount(seg_owner, minlength=y.size)[seg_owner]
        ref = np.broadcast_to(base[seg_owner] / (4.0 * nseg), (2, seg_owner.size))
        try:
            val, err = integrate_batch(integrand, np.zeros(seg_owner.size),
                                       np.ones(seg_owner.size), ncomp=2,
                                       rel_tol=rel_tol, abs_tol=q.abs_tol,
                                       ref=ref, max_panels=q.max_panels)
        except QuadratureError as exc:
            raise QuadratureError(str(exc), exc.estimate, exc.error) from None
        for comp in range(2):
            J[comp] = np.bincount(seg_owner, val[comp], minlength=y.size)
            Jerr[comp] = np.bincount(seg_owner, err[comp], minlength=y.size)

    # discarded Fermi tail beyond U
    tail = 2.0 * np.exp(-(B * np.maximum(U, D) - m)) / B * (2.0 + D * D)
    P00 = base + 4.0 * J[0]
    Ppi = base + 4.0 * J[1]
    err = 4.0 * (Jerr + tail)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(np.abs(P00) > 0, err[0] / np.abs(P00), err[0])
        rel = np.maximum(rel, np.where(np.abs(Ppi) > 0, err[1] / np.abs(Ppi), err[1]))
    return TensorValues(float(zeta), y, p, P00, Ppi, rel, c.fine_structure)


def pi00_zero_values(y, sheet, g, q=QuadratureConfig(), rel_tol=None):
    """Pi_00 at zero frequency for an array of ``y > 0``.

    The inverse square root at the upper end point is removed by the
    substitution u = sqrt(1 + D0^2) cos(phi).

    Returns
    -------
    values, abs_err : ndarray
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("pi00_zero needs y > 0")
    rel_tol = 0.1 * q.rel_tol if rel_tol is None else rel_tol
    c = g.constants
    alpha = c.fine_structure
    vf = sheet.fermi_ratio
    hw = characteristic_energy(g)
    kT = thermal_energy(g)
    m = sheet.chem_potential_mu / kT

    D0 = sheet.gap_delta / (hw * vf * y)
    B0 = hw * vf * y / (2.0 * kT)
    ustar = np.sqrt(1.0 + D0 * D0)
    phi_max = np.arctan2(1.0, D0)

    term_psi = alpha * y / vf * psi(D0)
    term_log = (8.0 * alpha * kT / (vf * vf * hw)
                * thermal_log(sheet.gap_delta / (2.0 * kT), m))
    pref = 4.0 * alpha * y / vf

    def integrand(idx, phi):
        us = ustar[idx]
        u = us * np.cos(phi)
        w = expit(-(B0[idx] * u + m)) + expit(-(B0[idx] * u - m))
        sn = us * np.sin(phi)
        return w * (sn * sn - D0[idx] ** 2)

    ref = (term_psi + term_log) / pref
    val, err = integrate_batch(integrand, np.zeros(y.size), phi_max,
                               rel_tol=rel_tol, abs_tol=q.abs_tol, ref=ref[None, :],
                               max_panels=q.max_panels)
    return term_psi + term_log - pref * val[0], pref * err[0]


def pi00(point: TensorPoint, sheet: GrapheneSheet, g: Geometry,
         q: QuadratureConfig = QuadratureConfig()) -> float:
    """Dimensionless Pi_00 at (zeta_l, y); dispatches to pi00_zero when zeta_l = 0."""
    if point.zeta_l == 0:
        return pi00_zero(point.y, sheet, g, q)
    return float(tensor_components(point.zeta_l, point.y, sheet, g, q).pi00[0])


def pi_combo(point: TensorPoint, sheet: GrapheneSheet, g: Geometry,
             q: QuadratureConfig = QuadratureConfig()) -> float:
    """Dimensionless combination Pi_l entering r_TE; zero at zeta_l = 0."""
    if point.zeta_l == 0:
        return 0.0
    return float(tensor_components(point.zeta_l, point.y, sheet, g, q).pi[0])


def pi00_zero(y: float, sheet: GrapheneSheet, g: Geometry,
              q: QuadratureConfig = QuadratureConfig()) -> float:
    value, _ = pi00_zero_values([y], sheet, g, q)
    return float(value[0])


def dielectric_functions(point: TensorPoint, sheet: GrapheneSheet, g: Geometry,
                         q: QuadratureConfig = QuadratureConfig(), *,
                         pi00_value=None, pi_value=None, transverse=True):
    """Longitudinal and transverse nonlocal dielectric functions.

    Returns ``(eps_L, eps_Tr)``.  The transverse function does not exist at
    zero frequency: there a ValueError is raised unless ``transverse=False``,
    in which case ``(eps_L, None)`` is returned.  Precomputed tensor values
    may be passed to skip re-evaluation.
    """
    zeta, y = point.zeta_l, point.y
    if not y > zeta:
        raise ValueError("dielectric functions need y > zeta")
    if zeta == 0 and transverse:
        raise ValueError("eps_Tr is undefined at zero frequency; pass transverse=False")
    root = math.sqrt((y - zeta) * (y + zeta))
    if pi00_value is None or (zeta > 0 and pi_value is None):
        if zeta > 0:
            tv = tensor_components(zeta, y, sheet, g, q)
            pi00_value = float(tv.pi00[0]) if pi00_value is None else pi00_value
            pi_value = float(tv.pi[0]) if pi_value is None else pi_value
        else:
            pi00_value = pi00_zero(y, sheet, g, q)
    eps_l = 1.0 + pi00_value / (2.0 * root)
    if zeta == 0:
        return eps_l, None
    eps_tr = 1.0 + pi_value / (2.0 * zeta * zeta * root)
    return eps_l, eps_tr
