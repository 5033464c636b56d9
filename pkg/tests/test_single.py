"""One-dimensional closed forms."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ruin2d.errors import DegenerateModelWarning, InvalidInput
from ruin2d.single import SinglePortfolio, normalize, ruin_finite, ruin_infinite


def reference_ruin(c, sigma, u, T):
    # independent re-derivation through scipy.stats in the original
    # (unnormalized) parameters: reflection argument for the drifted
    # Brownian first passage over level u
    mu = c / sigma
    x = u / sigma
    st_ = math.sqrt(T)
    return (stats.norm.cdf((-x - mu * T) / st_)
            + math.exp(-2.0 * mu * x) * stats.norm.cdf((-x + mu * T) / st_))


class TestRuinFinite:
    def test_reference_point(self):
        # the value quoted in the CLI contract
        p = SinglePortfolio(c=1.0, sigma=1.0, u=1.0, T=1.0)
        assert ruin_finite(p) == pytest.approx(0.0904178, abs=5e-8)

    def test_driftless_reflection(self):
        # c = 0: first passage of |W| gives exactly 2*Phi(-u)
        for u in (0.3, 1.0, 2.5):
            p = SinglePortfolio(c=0.0, sigma=1.0, u=u, T=1.0)
            assert ruin_finite(p) == pytest.approx(
                2.0 * stats.norm.cdf(-u), rel=1e-12)

    @pytest.mark.parametrize("c,sigma,u,T", [
        (0.5, 1.0, 0.5, 1.0),
        (2.0, 1.0, 1.0, 1.0),
        (1.0, 2.0, 1.5, 3.0),
        (0.25, 0.5, 0.75, 0.25),
        (3.0, 1.5, 4.0, 2.0),
    ])
    def test_general_parameters_match_reference(self, c, sigma, u, T):
        got = ruin_finite(SinglePortfolio(c=c, sigma=sigma, u=u, T=T))
        assert got == pytest.approx(reference_ruin(c, sigma, u, T), rel=1e-11)

    def test_zero_capital(self):
        p = SinglePortfolio(c=1.0, sigma=1.0, u=0.0, T=1.0)
        assert ruin_finite(p) == pytest.approx(1.0, abs=1e-12)

    def test_long_horizon_approaches_infinite(self):
        fin = ruin_finite(SinglePortfolio(c=1.0, sigma=1.0, u=1.0, T=400.0))
        inf = ruin_infinite(SinglePortfolio(c=1.0, sigma=1.0, u=1.0,
                                            T=math.inf))
        assert fin == pytest.approx(inf, abs=1e-9)

    def test_rejects_negative_capital(self):
        with pytest.raises(InvalidInput):
            ruin_finite(SinglePortfolio(c=1.0, sigma=1.0, u=-0.5, T=1.0))

    def test_rejects_infinite_horizon(self):
        with pytest.raises(InvalidInput):
            ruin_finite(SinglePortfolio(c=1.0, sigma=1.0, u=1.0, T=math.inf))

    @given(c=st.floats(-3.0, 3.0), u=st.floats(0.0, 6.0))
    @settings(max_examples=200, deadline=None)
    def test_in_unit_interval(self, c, u):
        val = ruin_finite(SinglePortfolio(c=c, sigma=1.0, u=u, T=1.0))
        assert 0.0 <= val <= 1.0

    @given(c=st.floats(-2.0, 2.0), u=st.floats(0.0, 4.0),
           T=st.floats(0.1, 4.0))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_capital_and_horizon(self, c, u, T):
        base = ruin_finite(SinglePortfolio(c=c, sigma=1.0, u=u, T=T))
        more_capital = ruin_finite(SinglePortfolio(c=c, sigma=1.0,
                                                   u=u + 0.5, T=T))
        longer = ruin_finite(SinglePortfolio(c=c, sigma=1.0, u=u, T=T + 0.5))
        assert more_capital <= base + 1e-12
        assert longer >= base - 1e-12


class TestRuinInfinite:
    def test_exponent(self):
        p = SinglePortfolio(c=1.5, sigma=2.0, u=3.0, T=math.inf)
        assert ruin_infinite(p) == pytest.approx(math.exp(-2.0 * 1.5 * 3.0 / 4.0))

    def test_nonpositive_loading_warns_and_returns_one(self):
        p = SinglePortfolio(c=0.0, sigma=1.0, u=1.0, T=math.inf)
        with pytest.warns(DegenerateModelWarning):
            assert ruin_infinite(p) == 1.0


class TestNormalize:
    def test_identity_when_already_normalized(self):
        assert normalize(1.0, 2.0, 1.0, 1.0, 0.5, 0.7, 1.0) == \
            (1.0, 2.0, 0.5, 0.7)

    def test_scaling_preserves_ruin_probability(self):
        c, sigma, u, T = 0.8, 1.7, 2.2, 3.5
        cn, _, un, _ = normalize(c, 0.0, sigma, 1.0, u, 0.0, T)
        orig = ruin_finite(SinglePortfolio(c=c, sigma=sigma, u=u, T=T))
        norm = ruin_finite(SinglePortfolio(c=cn, sigma=1.0, u=un, T=1.0))
        assert orig == pytest.approx(norm, rel=1e-12)

    def test_rejects_bad_sigma(self):
        with pytest.raises(InvalidInput):
            normalize(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0)

    def test_rejects_infinite_horizon(self):
        with pytest.raises(InvalidInput):
            normalize(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, math.inf)
