"""Parameter scans: the a_0 threshold surface, dF_0 curves and exact/asymptotic ratios."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import RegimeViolation, force_asymptotic
from .lifshitz import force_total, force_zero_term, IDEAL_METAL_REDUCED, STATIC
from .polarization import GrapheneSheet, QuadratureConfig
from .quadrature import QuadratureError
from .units import Geometry

__all__ = [
    "BracketError",
    "ScanSpec",
    "CurveTable",
    "A0Result",
    "find_a0",
    "find_crossing",
    "scan_a0_vs_gap",
    "scan_delta_f0",
    "scan_exact_vs_asymptotic",
    "default_gap_grid",
    "WORKERS_ENV",
]

WORKERS_ENV = "CPGRAPHENE_MAX_WORKERS"
A_CEILING = 100.0
MEV = 1e-3


class BracketError(ValueError):
    """No threshold crossing inside the admissible separation range."""


def default_gap_grid():
    """0.001 eV to 0.2 eV in steps of 0.01 eV, closing on 0.2 eV."""
    gaps = [round(0.001 + 0.01 * k, 6) for k in range(20)]
    return gaps + [0.2]


@dataclass(frozen=True)
class ScanSpec:
    gaps: Sequence[float] = field(default_factory=default_gap_grid)
    mus: Sequence[float] = (0.0, 25 * MEV, 75 * MEV, 150 * MEV)
    a_min: float = 3.0
    a_max: float = 100.0
    n_points: int = 40
    temperature: float = 300.0
    threshold: float = 0.01
    tol_um: float = 0.01
    fermi_ratio: float = 1.0 / 300.0

    def __post_init__(self):
        if not self.a_min < self.a_max:
            raise ValueError("a_min must be smaller than a_max")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not self.gaps or not self.mus:
            raise ValueError("parameter grids must be non-empty")
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if not self.tol_um > 0:
            raise ValueError("tol_um must be positive")

    def separations(self):
        return np.geomspace(self.a_min, self.a_max, self.n_points)


@dataclass
class CurveTable:
    """Plot-ready table: one abscissa column and one column per curve.

    Missing points (failed evaluations) are stored as ``None``.
    ``crossings`` maps a curve label to ``{threshold: separation or None}``.
    """

    abscissa_name: str
    abscissa_unit: str
    abscissa: list
    curves: dict
    curve_params: dict
    quantity: str
    metadata: dict = field(default_factory=dict)
    crossings: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.abscissa, self.abscissa[1:])):
            raise ValueError("abscissa must be strictly increasing")


@dataclass(frozen=True)
class A0Result:
    a0: float
    ratio: float
    evaluations: int


def _workers(workers):
    cap = os.environ.get(WORKERS_ENV)
    if workers is None:
        workers = os.cpu_count() or 1
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def _map(fn, items, workers=None):
    items = list(items)
    n = min(_workers(workers), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _zero_fraction(a, sheet, T, q, reflection):
    return force_total(sheet, Geometry(a, T), STATIC, q, reflection).zero_term_fraction


def find_a0(sheet: GrapheneSheet, T: float, threshold: float = 0.99,
            bracket=(1.0, 10.0), tol_um: float = 0.01,
            q: QuadratureConfig = QuadratureConfig(),
            reflection: Optional[Callable] = None) -> A0Result:
    """Smallest separation where F_0/F reaches ``threshold``, by bisection.

    The upper end of the bracket is doubled (up to 100 um) until the ratio
    there reaches the threshold.  The returned separation is the upper end of
    the final bracket, so the recorded ratio is always >= threshold.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < a_lo < a_hi")
    f = partial(_zero_fraction, sheet=sheet, T=T, q=q, reflection=reflection)
    r_lo = f(lo)
    evaluations = 1
    if r_lo >= threshold:
        raise BracketError(f"F0/F = {r_lo:.6g} already >= {threshold} at a_lo = {lo} um")
    r_hi = f(hi)
    evaluations += 1
    while r_hi < threshold:
        if hi >= A_CEILING:
            raise BracketError(f"F0/F stays below {threshold} up to {A_CEILING} um")
        lo, r_lo = hi, r_hi
        hi = min(2.0 * hi, A_CEILING)
        r_hi = f(hi)
        evaluations += 1
    while hi - lo > tol_um:
        mid = 0.5 * (lo + hi)
        r_mid = f(mid)
        evaluations += 1
        if r_mid >= threshold:
            hi, r_hi = mid, r_mid
        else:
            lo = mid
    return A0Result(hi, r_hi, evaluations)


def find_crossing(criterion: Callable[[float], float], grid, values, threshold,
                  tol_um):
    """Separation beyond which ``criterion <= threshold`` at every sampled point.

    ``values`` are criterion values on ``grid`` (``None`` counts as failing).
    Between the last failing sample and its right neighbour the crossing is
    refined by bisection.  Returns the first grid point when all samples
    pass and ``None`` when the last one fails.
    """
    ok = [v is not None and v <= threshold for v in values]
    if not ok[-1]:
        return None
    last_bad = max((i for i, flag in enumerate(ok) if not flag), default=None)
    if last_bad is None:
        return float(grid[0])
    lo, hi = float(grid[last_bad]), float(grid[last_bad + 1])
    while hi - lo > tol_um:
        mid = 0.5 * (lo + hi)
        try:
            passed = criterion(mid) <= threshold
        except (QuadratureError, RegimeViolation):
            passed = False
        if passed:
            hi = mid
        else:
            lo = mid
    return hi


def _metadata(spec, q, extra=None):
    meta = {
        "temperature_K": spec.temperature,
        "fermi_ratio": spec.fermi_ratio,
        "rel_tol": q.rel_tol,
        "matsubara_rel_tail": q.matsubara_rel_tail,
        "threshold": spec.threshold,
        "tol_um": spec.tol_um,
        "code_version": __version__,
    }
    meta.update(extra or {})
    return meta


def _label(gap, mu):
    return f"gap={gap:g}eV;mu={mu:g}eV"


def _a0_point(args, T, threshold, tol_um, q, fermi_ratio, bracket):
    gap, mu = args
    try:
        res = find_a0(GrapheneSheet(gap, mu, fermi_ratio), T, threshold, bracket, tol_um, q)
        return res.a0
    except (BracketError, QuadratureError):
        return None


def scan_a0_vs_gap(spec: ScanSpec, q: QuadratureConfig = QuadratureConfig(),
                   threshold: float = 0.99, bracket=(1.0, 10.0),
                   workers: Optional[int] = None) -> CurveTable:
    """a_0 as a function of the gap, one curve per chemical potential."""
    gaps = sorted(spec.gaps)
    points = [(gap, mu) for mu in spec.mus for gap in gaps]
    fn = partial(_a0_point, T=spec.temperature, threshold=threshold,
                 tol_um=spec.tol_um, q=q, fermi_ratio=spec.fermi_ratio, bracket=bracket)
    values = _map(fn, points, workers)
    curves, params = {}, {}
    n = len(gaps)
    for j, mu in enumerate(spec.mus):
        label = f"mu={mu:g}eV"
        curves[label] = values[j * n:(j + 1) * n]
        params[label] = {"mu_eV": mu}
    return CurveTable("gap", "eV", list(gaps), curves, params, "a0_um",
                      _metadata(spec, q, {"zero_term_share": threshold,
                                          "bracket_um": list(bracket)}))


def _delta_f0_point(args, T, q, fermi_ratio):
    gap, mu, a = args
    try:
        f0 = force_zero_term(GrapheneSheet(gap, mu, fermi_ratio), Geometry(a, T), STATIC, q)
    except QuadratureError:
        return None
    return f0.reduced_force / IDEAL_METAL_REDUCED - 1.0


def _ratio_point(args, T, q, fermi_ratio):
    gap, mu, a = args
    sheet = GrapheneSheet(gap, mu, fermi_ratio)
    g = Geometry(a, T)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            asym = force_asymptotic(sheet, g).reduced_force
        exact = force_zero_term(sheet, g, STATIC, q).reduced_force
    except (QuadratureError, RegimeViolation):
        return None
    return exact / asym


def _separation_scan(spec, q, workers, point_fn, quantity, deviation, thresholds):
    grid = spec.separations()
    pairs = [(gap, mu) for gap in spec.gaps for mu in spec.mus]
    points = [(gap, mu, float(a)) for gap, mu in pairs for a in grid]
    fn = partial(point_fn, T=spec.temperature, q=q, fermi_ratio=spec.fermi_ratio)
    values = _map(fn, points, workers)
    curves, params, crossings = {}, {}, {}
    n = len(grid)
    for k, (gap, mu) in enumerate(pairs):
        label = _label(gap, mu)
        column = values[k * n:(k + 1) * n]
        curves[label] = column
        params[label] = {"gap_eV": gap, "mu_eV": mu}

        def criterion(a, gap=gap, mu=mu):
            v = fn((gap, mu, a))
            return math.inf if v is None else deviation(v)

        devs = [None if v is None else deviation(v) for v in column]
        crossings[label] = {
            thr: find_crossing(criterion, grid, devs, thr, spec.tol_um) for thr in thresholds}
    return CurveTable("separation", "um", [float(a) for a in grid], curves, params,
                      quantity, _metadata(spec, q), crossings)


def scan_delta_f0(spec: ScanSpec, q: QuadratureConfig = QuadratureConfig(),
                  workers: Optional[int] = None) -> CurveTable:
    """dF_0(a) curves with the separation where |dF_0| first stays below the threshold."""
    return _separation_scan(spec, q, workers, _delta_f0_point, "delta_f0",
                            abs, (spec.threshold,))


def scan_exact_vs_asymptotic(spec: ScanSpec, q: QuadratureConfig = QuadratureConfig(),
                             workers: Optional[int] = None,
                             thresholds=(0.01, 0.02)) -> CurveTable:
    """F_0 / F_0^as curves with 1% and 2% agreement separations."""
    return _separation_scan(spec, q, workers, _ratio_point, "f0_over_f0_asymptotic",
                            lambda v: abs(v - 1.0), tuple(thresholds))
