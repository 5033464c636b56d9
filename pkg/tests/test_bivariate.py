"""Bounds, asymptotics and the ruin-time limit for the two-portfolio model."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruin2d.bivariate import (
    BivariateBRM,
    Regime,
    asym_approx,
    classify_regime,
    crude_upper_bound,
    early_window_bound,
    lambda_pair,
    prop1_bounds,
    q_exponent,
    ruin_time_limit_cdf,
    tail_equivalent_form,
)
from ruin2d.errors import (
    InvalidInput,
    MissingConstant,
    RegimeBoundaryWarning,
    RegimeError,
)
from ruin2d.numerics import GaussianPair, bivariate_normal_tail
from ruin2d.single import SinglePortfolio, ruin_finite


def brm(c1=0.0, c2=0.0, rho=0.0, a=1.0, u=1.0):
    return BivariateBRM(c1=c1, c2=c2, rho=rho, a=a, u=u)


class TestModel:
    def test_rejects_degenerate_rho(self):
        with pytest.raises(InvalidInput):
            brm(rho=1.0)

    def test_rejects_capital_ratio_above_one(self):
        with pytest.raises(InvalidInput):
            brm(a=1.2)

    def test_second_capital(self):
        assert brm(a=0.5, u=3.0).v == pytest.approx(1.5)


class TestRegime:
    def test_classification(self):
        assert classify_regime(1.0, 0.0) is Regime.ABOVE_RHO
        assert classify_regime(0.0, 0.5) is Regime.BELOW_RHO
        assert classify_regime(0.5, 0.5) is Regime.AT_RHO

    def test_boundary_warning(self):
        with pytest.warns(RegimeBoundaryWarning):
            classify_regime(0.5 + 1e-10, 0.5)


class TestExponents:
    # the two tilting exponents and the decay exponent satisfy two exact
    # linear identities; these pin the algebra against sign slips
    @given(a=st.floats(-0.9, 1.0), rho=st.floats(-0.9, 0.9))
    @settings(max_examples=300, deadline=None)
    def test_lambda_identities(self, a, rho):
        if a <= rho:
            with pytest.raises(RegimeError):
                lambda_pair(a, rho)
            return
        l1, l2 = lambda_pair(a, rho)
        assert l1 + rho * l2 == pytest.approx(1.0, abs=1e-9)
        assert l1 + a * l2 == pytest.approx(q_exponent(a, rho), abs=1e-9)
        assert l2 > 0.0

    def test_q_above(self):
        assert q_exponent(1.0, 0.0) == pytest.approx(2.0)
        assert q_exponent(0.5, -0.5) == pytest.approx(
            (1.0 + 0.5 + 0.25) / 0.75)

    def test_q_below_is_one(self):
        assert q_exponent(0.0, 0.5) == 1.0
        assert q_exponent(-0.3, 0.2) == 1.0

    def test_q_continuous_at_boundary(self):
        rho = 0.4
        assert q_exponent(rho, rho) == pytest.approx(1.0)
        assert q_exponent(rho + 1e-9, rho) == pytest.approx(1.0, abs=1e-7)


class TestProp1Bounds:
    def test_origin_orthant(self):
        lo, up = prop1_bounds(brm(u=0.0))
        assert lo == pytest.approx(0.25, abs=1e-10)
        assert up == 1.0

    def test_lower_is_joint_tail(self):
        m = brm(c1=0.5, c2=0.5, rho=0.3, u=1.0)
        lo, up = prop1_bounds(m)
        assert lo == pytest.approx(
            bivariate_normal_tail(1.5, 1.5, GaussianPair(0.3)), rel=1e-12)
        assert lo <= up <= 1.0

    def test_negative_drift_denominator_clipped_at_zero(self):
        lo_neg, up_neg = prop1_bounds(brm(c1=-1.0, c2=-1.0, u=1.0))
        lo_zero, _ = prop1_bounds(brm(c1=0.0, c2=0.0, u=1.0))
        # denominator uses max(c, 0), so the ratio shares the c=0 divisor
        assert up_neg == pytest.approx(lo_neg / 0.25, rel=1e-12)
        assert lo_neg > lo_zero

    def test_rejects_interior_negative_quadrant(self):
        with pytest.raises(InvalidInput):
            prop1_bounds(brm(u=-0.5), v=-0.5)

    @given(u=st.floats(0.0, 4.0), rho=st.floats(-0.9, 0.9),
           c=st.floats(-1.0, 2.0))
    @settings(max_examples=200, deadline=None)
    def test_ordering(self, u, rho, c):
        lo, up = prop1_bounds(brm(c1=c, c2=c, rho=rho, u=u))
        assert 0.0 <= lo <= up <= 1.0


class TestCrudeBound:
    def test_is_min_of_marginals(self):
        m = brm(c1=0.5, c2=1.5, a=0.5, u=1.0)
        p1 = ruin_finite(SinglePortfolio(c=0.5, sigma=1.0, u=1.0, T=1.0))
        p2 = ruin_finite(SinglePortfolio(c=1.5, sigma=1.0, u=0.5, T=1.0))
        assert crude_upper_bound(m) == pytest.approx(min(p1, p2), rel=1e-12)

    def test_dominates_lower_bound(self):
        m = brm(c1=0.5, c2=0.5, rho=0.2, u=1.5)
        lo, _ = prop1_bounds(m)
        assert crude_upper_bound(m) >= lo


class TestAsymptotics:
    def test_above_regime_requires_constant(self):
        with pytest.raises(MissingConstant):
            asym_approx(brm(u=3.0))
        with pytest.raises(MissingConstant):
            tail_equivalent_form(brm(u=3.0))

    def test_two_forms_agree_asymptotically(self):
        # the pdf-based and tail-based leading forms are equivalent up to
        # the Mills-ratio correction, so their ratio tends to one
        C = 2.0
        ratios = []
        for u in (5.0, 10.0, 20.0):
            m = brm(u=u)
            ratios.append(asym_approx(m, C) / tail_equivalent_form(m, C))
        assert abs(ratios[-1] - 1.0) < abs(ratios[0] - 1.0)
        assert ratios[-1] == pytest.approx(1.0, abs=0.02)

    def test_below_regime_explicit(self):
        m = brm(rho=0.5, a=0.0, u=4.0)
        val = asym_approx(m)
        # below the correlation the weaker portfolio dominates: compare
        # against its exact marginal tail, same leading order
        marginal = ruin_finite(SinglePortfolio(c=0.0, sigma=1.0, u=4.0, T=1.0))
        assert 0.0 < val < 1.0
        assert val == pytest.approx(marginal, rel=0.35)

    def test_below_regime_tail_form(self):
        m = brm(rho=0.5, a=0.0, u=4.0)
        got = tail_equivalent_form(m)
        ref = asym_approx(m)
        assert got == pytest.approx(ref, rel=0.15)

    def test_linear_in_constant(self):
        m = brm(u=3.0)
        assert asym_approx(m, 4.0) == pytest.approx(2.0 * asym_approx(m, 2.0),
                                                    rel=1e-12)


class TestEarlyWindow:
    def test_bound_value(self):
        m = brm(u=4.0)
        res = early_window_bound(m, T_window=4.0)
        lo, up = prop1_bounds(m)
        assert res.bound == pytest.approx(math.exp(-0.5) * up, rel=1e-9)

    def test_validity_flag_large_u(self):
        assert early_window_bound(brm(u=10.0), T_window=2.0).valid

    def test_empty_window_rejected(self):
        with pytest.raises(InvalidInput):
            early_window_bound(brm(u=1.0), T_window=2.0)

    def test_capped_at_one(self):
        res = early_window_bound(brm(u=2.0), T_window=0.01)
        assert res.bound <= 1.0


class TestRuinTimeLimit:
    def test_zero_at_origin(self):
        assert ruin_time_limit_cdf(0.0, 1.0, 0.0) == 0.0

    def test_exponential_rate_is_half_q(self):
        # q = 2 at (a=1, rho=0), so the median sits at ln 2
        assert ruin_time_limit_cdf(math.log(2.0), 1.0, 0.0) == \
            pytest.approx(0.5)

    def test_rejects_negative_argument(self):
        with pytest.raises(InvalidInput):
            ruin_time_limit_cdf(-0.1, 1.0, 0.0)

    @given(x=st.floats(0.0, 50.0), a=st.floats(-0.9, 1.0),
           rho=st.floats(-0.9, 0.9))
    @settings(max_examples=200, deadline=None)
    def test_valid_cdf(self, x, a, rho):
        v = ruin_time_limit_cdf(x, a, rho)
        assert 0.0 <= v <= 1.0
        assert ruin_time_limit_cdf(x + 1.0, a, rho) >= v
