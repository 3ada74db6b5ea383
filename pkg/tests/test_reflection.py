import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from cpgraphene.polarization import GrapheneSheet, tensor_point
from cpgraphene.reflection import (ReflectionPair, r_tm_zero, r_tm_zero_complement,
                                   r_tm_zero_from_pi, reflection_at, te_from_tensor,
                                   tm_from_tensor)
from cpgraphene.units import Geometry, matsubara_zeta

import oracles

G2 = Geometry(2.0, 300.0)


def test_pair_ranges():
    ReflectionPair(1.0, -1.0)
    with pytest.raises(ValueError):
        ReflectionPair(1.1, 0.0)
    with pytest.raises(ValueError):
        ReflectionPair(0.5, 0.2)


def test_limits_of_the_literal_forms():
    assert tm_from_tensor(1e300, 2.0, 1.0) == pytest.approx(1.0)
    assert tm_from_tensor(0.0, 2.0, 1.0) == 0.0
    assert te_from_tensor(0.0, 2.0, 1.0) == 0.0
    assert te_from_tensor(1e300, 2.0, 1.0) == pytest.approx(-1.0)
    # degenerate point y = zeta
    assert tm_from_tensor(3.0, 1.5, 1.5) == 1.0
    assert tm_from_tensor(0.0, 1.5, 1.5) == 0.0
    assert te_from_tensor(3.0, 1.5, 1.5) == -1.0


@given(st.floats(0.0, 1e6), st.floats(0.0, 1e6), st.floats(0.01, 50), st.floats(0, 1))
def test_tm_monotone_in_tensor(p1, p2, y, frac):
    zeta = frac * y * 0.99
    lo, hi = sorted((p1, p2))
    assert tm_from_tensor(lo, y, zeta) <= tm_from_tensor(hi, y, zeta)


def test_zero_frequency_forms():
    assert r_tm_zero_from_pi(2.0, 1.0) == 0.5
    assert r_tm_zero_from_pi(1.0, 1e12) < 1e-11
    rng = np.random.default_rng(7)
    pi, y = rng.uniform(0, 1e3, 100), rng.uniform(1e-3, 80, 100)
    assert_allclose(r_tm_zero_from_pi(pi, y) - r_tm_zero_complement(pi, y), 0.0, atol=1e-15)


def test_reflection_at_matches_oracle_substitution():
    sheet = GrapheneSheet(0.1, 0.0)
    z = matsubara_zeta(1, G2)
    y = 2 * z
    pair = reflection_at(tensor_point(z, y, sheet, G2), sheet, G2)
    p00, ppi = oracles.mp_tensor(z, y, 0.1, 0.0, 2.0, 300.0)
    assert_allclose(pair.r_tm, y * p00 / (y * p00 + 2 * (y * y - z * z)), rtol=1e-9)
    assert_allclose(pair.r_te, -ppi / (ppi + 2 * y * (y * y - z * z)), rtol=1e-9)


def test_reflection_at_zero_frequency():
    sheet = GrapheneSheet(0.1, 0.05)
    pair = reflection_at(tensor_point(0.0, 1.0, sheet, G2), sheet, G2)
    assert pair.r_te == 0.0
    assert pair.r_tm == r_tm_zero(1.0, sheet, G2)


def test_reflection_finite_at_degenerate_point():
    sheet = GrapheneSheet(0.1, 0.0)
    z = matsubara_zeta(1, G2)
    pair = reflection_at(tensor_point(z, z, sheet, G2), sheet, G2)
    assert 0 <= pair.r_tm <= 1 and -1 <= pair.r_te <= 0


def test_r_tm_zero_approaches_one_with_doping():
    for y in (0.5, 1.0, 3.0):
        vals = [r_tm_zero(y, GrapheneSheet(0.2, mu), G2) for mu in (0.0, 0.025, 0.075, 0.15)]
        assert np.all(np.diff(vals) > 0) and vals[-1] < 1.0
