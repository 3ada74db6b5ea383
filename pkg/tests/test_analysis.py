import math

import numpy as np
import pytest
from scipy.optimize import brentq

from cpgraphene.analysis import (WORKERS_ENV, BracketError, CurveTable, ScanSpec,
                                 default_gap_grid, find_a0, find_crossing, scan_a0_vs_gap,
                                 scan_delta_f0, scan_exact_vs_asymptotic)
from cpgraphene.lifshitz import ideal_metal_reflection
from cpgraphene.polarization import GrapheneSheet, QuadratureConfig
from cpgraphene.units import Geometry, matsubara_zeta


def test_scan_spec_validation():
    ScanSpec()
    for kwargs in (dict(a_min=10.0, a_max=3.0), dict(threshold=1.0), dict(threshold=0.0),
                   dict(gaps=()), dict(mus=()), dict(n_points=1), dict(tol_um=0.0)):
        with pytest.raises(ValueError):
            ScanSpec(**kwargs)


def test_default_grid():
    grid = default_gap_grid()
    assert grid[0] == 0.001 and grid[-1] == 0.2 and grid[-2] == pytest.approx(0.191)
    assert np.all(np.diff(grid) > 0)
    sep = ScanSpec().separations()
    assert sep.size == 40 and sep[0] == pytest.approx(3.0) and sep[-1] == pytest.approx(100.0)


def test_curve_table_requires_increasing_abscissa():
    with pytest.raises(ValueError):
        CurveTable("a", "um", [1.0, 1.0], {}, {}, "q")


def _toy_fraction(a, T=300.0):
    # perfect reflector: K_l = 2 exp(-zeta) (zeta^3 + 3 zeta^2 + 6 zeta + 6)
    g = Geometry(a, T)
    tail = 0.0
    for l in range(1, 400):
        z = matsubara_zeta(l, g)
        tail += 2 * math.exp(-z) * (z ** 3 + 3 * z ** 2 + 6 * z + 6)
    return 6.0 / (6.0 + tail)


def test_find_a0_perfect_reflector_oracle():
    ref = brentq(lambda a: _toy_fraction(a) - 0.99, 0.5, 10.0, xtol=1e-12)
    res = find_a0(GrapheneSheet(), 300.0, tol_um=1e-4, reflection=ideal_metal_reflection)
    assert ref <= res.a0 <= ref + 1e-4
    assert res.ratio >= 0.99


def test_find_a0_records_ratio_and_tolerance():
    sheet = GrapheneSheet(0.1, 0.0)
    res = find_a0(sheet, 300.0, tol_um=0.01)
    assert res.ratio >= 0.99
    from cpgraphene.lifshitz import force_total
    below = force_total(sheet, Geometry(res.a0 - 0.01, 300.0)).zero_term_fraction
    assert below < 0.99
    assert res.a0 < 7.6


def test_find_a0_grows_with_doping_at_small_gap():
    lo = find_a0(GrapheneSheet(0.05, 0.0), 300.0).a0
    hi = find_a0(GrapheneSheet(0.05, 0.15), 300.0).a0
    assert hi > lo


def test_find_a0_expands_bracket_and_fails_cleanly():
    # at 30 K the threshold separation is ten times larger than the default bracket
    res = find_a0(GrapheneSheet(0.1), 30.0, reflection=ideal_metal_reflection)
    assert 10.0 < res.a0 < 100.0
    with pytest.raises(BracketError):
        find_a0(GrapheneSheet(0.1), 1.0, reflection=ideal_metal_reflection)
    with pytest.raises(BracketError):
        find_a0(GrapheneSheet(0.1), 300.0, bracket=(5.0, 10.0))
    with pytest.raises(ValueError):
        find_a0(GrapheneSheet(0.1), 300.0, bracket=(5.0, 1.0))


def test_find_crossing_synthetic():
    grid = np.linspace(1.0, 10.0, 10)
    crit = lambda a: 1.0 / a
    values = [crit(a) for a in grid]
    a_star = find_crossing(crit, grid, values, 0.25, 1e-6)
    assert 4.0 <= a_star <= 4.0 + 1e-6
    # all samples pass / last sample fails
    assert find_crossing(crit, grid, values, 2.0, 1e-6) == 1.0
    assert find_crossing(lambda a: a, grid, list(grid), 5.0, 1e-6) is None
    # a wiggle below the threshold before the final failing sample is ignored
    wiggly = [0.1, 0.5, 0.1, 0.5, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
    a_w = find_crossing(lambda a: 0.5 if a < 4.5 else 0.1, grid, wiggly, 0.2, 1e-6)
    assert 4.5 <= a_w <= 4.5 + 1e-6
    # a gap (None) counts as a failing sample; refinement starts just after it
    gapped = [None if i == 8 else 0.0 for i in range(10)]
    assert 9.0 < find_crossing(lambda a: 0.0, grid, gapped, 0.1, 1e-3) <= 9.0 + 1e-3


def test_single_point_scan_equals_find_a0():
    spec = ScanSpec(gaps=(0.1,), mus=(0.0,), tol_um=0.01)
    table = scan_a0_vs_gap(spec, workers=1)
    assert table.curves["mu=0eV"] == [find_a0(GrapheneSheet(0.1), 300.0).a0]
    assert table.metadata["code_version"]


def test_scan_delta_f0_shape_and_monotone_decay():
    spec = ScanSpec(gaps=(0.2,), mus=(0.0, 0.15), n_points=8, a_max=300.0)
    table = scan_delta_f0(spec, workers=1)
    assert table.abscissa[0] == pytest.approx(3.0) and len(table.abscissa) == 8
    for label, column in table.curves.items():
        mags = np.abs(column)
        assert np.all(np.diff(mags) < 0)
        assert set(table.crossings[label]) == {0.01}
    assert table.crossings["gap=0.2eV;mu=0.15eV"][0.01] == pytest.approx(3.0)


def test_scan_records_failures_as_gaps():
    spec = ScanSpec(gaps=(0.1,), mus=(0.0,), n_points=3)
    table = scan_delta_f0(spec, QuadratureConfig(rel_tol=1e-15, max_panels=10), workers=1)
    assert table.curves["gap=0.1eV;mu=0eV"] == [None, None, None]
    assert table.crossings["gap=0.1eV;mu=0eV"][0.01] is None


def test_ratio_scan_records_regime_violations():
    spec = ScanSpec(gaps=(0.1,), mus=(0.0,), a_min=0.002, a_max=5.0, n_points=6)
    table = scan_exact_vs_asymptotic(spec, workers=1)
    column = table.curves["gap=0.1eV;mu=0eV"]
    assert column[0] is None and column[-1] is not None
    assert set(table.crossings["gap=0.1eV;mu=0eV"]) == {0.01, 0.02}


def test_scans_are_deterministic_and_worker_independent(monkeypatch):
    spec = ScanSpec(gaps=(0.15, 0.2), mus=(0.0, 0.075), n_points=5)
    serial = scan_exact_vs_asymptotic(spec, workers=1)
    again = scan_exact_vs_asymptotic(spec, workers=1)
    assert serial == again
    monkeypatch.setenv(WORKERS_ENV, "2")
    parallel = scan_exact_vs_asymptotic(spec, workers=4)
    assert parallel == serial


def test_ratios_invariant_under_alpha0():
    # static-model ratios never see alpha0: the scans take no polarizability at all,
    # and the force ratio is unchanged when one is supplied
    from cpgraphene.lifshitz import PolarizabilityModel, force_total
    sheet, g = GrapheneSheet(0.2, 0.025), Geometry(4.0, 300.0)
    f1 = force_total(sheet, g, PolarizabilityModel(alpha0=1.0))
    f2 = force_total(sheet, g, PolarizabilityModel(alpha0=37.0))
    assert f1.zero_term_fraction == f2.zero_term_fraction
