import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from jointruin.model import (
    InitialReserves, ModelParams, ParameterError, Regime, classify_regime, deterministic_gap, normalize,
    ordering_cross_time, reserves_from_normalized, validate,
)

from conftest import REF


def test_reference_params_are_valid():
    assert validate(REF) is REF
    assert REF.c1 / REF.delta1 == 4.0 and REF.c2 / REF.delta2 == 2.0


def test_fractions_must_sum_to_one():
    with pytest.raises(ParameterError) as err:
        validate(ModelParams(0.05, 1.0, 2.0, 1.0, 0.5, 0.6))
    assert "fraction_sum" in err.value.codes
    assert any(v.message == "fractions do not sum to 1" for v in err.value.violations)


def test_zero_rate_rejected():
    with pytest.raises(ParameterError) as err:
        validate(ModelParams(0.0, 1.0, 2.0, 1.0, 0.5, 0.5))
    assert any(v.message == "interest rate must be strictly positive" for v in err.value.violations)


def test_every_violation_is_listed():
    bad = ModelParams(-1.0, 0.0, 1.0, 2.0, 0.5, 0.6)
    assert set(v.code for v in bad.violations()) == {
        "rate_nonpositive", "intensity_nonpositive", "fraction_sum", "premium_order",
    }


def test_fraction_sum_tolerance():
    assert not ModelParams(0.05, 1.0, 2.0, 1.0, 0.3, 0.7 + 5e-13).violations()
    assert ModelParams(0.05, 1.0, 2.0, 1.0, 0.3, 0.7 + 1e-10).violations()


@pytest.mark.parametrize("u, regime", [
    ((3.0, 1.0), Regime.DEGENERATE),
    ((1.0, 3.0), Regime.NON_DEGENERATE),
    ((1.0, 1.0), Regime.NON_DEGENERATE),
])
def test_classify_regime(u, regime):
    assert classify_regime(REF, InitialReserves(*u)) is regime


@given(u1=st.floats(0, 100), u2=st.floats(0, 100), k=st.floats(0.01, 100))
def test_regime_invariant_under_common_scaling(u1, u2, k):
    base = classify_regime(REF, InitialReserves(u1, u2))
    scaled = ModelParams(REF.r, REF.lam, k * REF.c1, k * REF.c2, REF.delta1, REF.delta2)
    assert classify_regime(scaled, InitialReserves(k * u1, k * u2)) is base


def _params_for(p1, p2, r=0.05, d1=0.5):
    return ModelParams(r, 1.0, p1 * r * d1, p2 * r * (1 - d1), d1, 1 - d1)


def test_cross_time_equal_reserves_is_zero():
    assert ordering_cross_time(REF, InitialReserves(1.0, 1.0)) == 0.0


def test_cross_time_infinite_when_gap_exceeds_reach():
    p = _params_for(4.0, 2.0)
    assert ordering_cross_time(p, reserves_from_normalized(p, 1.0, 3.0)) == math.inf
    assert ordering_cross_time(p, reserves_from_normalized(p, 1.0, 5.0)) == math.inf


def test_cross_time_closed_form_and_bisection():
    p = _params_for(4.0, 2.0)
    res = reserves_from_normalized(p, 1.0, 2.0)
    t = ordering_cross_time(p, res)
    assert t == pytest.approx(-math.log(0.5) / 0.05, rel=1e-14)
    assert t == pytest.approx(13.8629, abs=1e-4)
    root = brentq(lambda s: float(deterministic_gap(p, res, s)), 0.0, 100.0, xtol=1e-14)
    assert t == pytest.approx(root, rel=1e-10)


def test_cross_time_rejects_degenerate():
    with pytest.raises(ValueError):
        ordering_cross_time(REF, InitialReserves(3.0, 1.0))


@given(x1=st.floats(0, 50), x2=st.floats(0, 50), t=st.floats(0, 200))
def test_deterministic_gap_formula(x1, x2, t):
    res = reserves_from_normalized(REF, x1, x2)
    st_ = normalize(REF, res)
    expected = (st_.x2 - st_.x1) + (REF.p2 - REF.p1) * (1 - math.exp(-REF.r * t))
    assert float(deterministic_gap(REF, res, t)) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_normalize_round_trip():
    res = InitialReserves(1.25, 3.5)
    st_ = normalize(REF, res)
    assert (st_.x1, st_.x2) == (2.5, 7.0)
    back = reserves_from_normalized(REF, st_.x1, st_.x2)
    assert back == res
    assert np.isclose(st_.p1, 80.0) and np.isclose(st_.p2, 40.0)
