"""Gosset and Black-Scholes prices, parity and limiting behaviour."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import stats

from gosset.martingale import TailMode, TailPolicy, resolve_policy
from gosset.pricing import (
    MarketParams,
    Model,
    OptionKind,
    StrikeAboveTruncationError,
    black_scholes,
    discount,
    gosset_call,
    gosset_price,
    gosset_put,
    parity_gap,
)

MARKET = MarketParams.from_sigma_t(50.0, 49.0, 0.03, 0.3, 1.0)
PARITY_TOL = 1e-6


def scipy_call(market, nu, mode, p):
    """Oracle built only on scipy: quad over the scipy t density."""
    x_c = stats.t.ppf(p, nu)
    s = market.sigma_t
    pdf = lambda x: stats.t.pdf(x, nu)  # noqa: E731
    bare = sp_integrate.quad(lambda x: math.exp(s * x) * pdf(x), -math.inf, x_c, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    fwd = market.s0 * math.exp(market.rate * market.tenor)
    if mode is TailMode.CAPPED:
        a_t = fwd / (bare + (1 - p) * math.exp(s * x_c))
    else:
        a_t = fwd / (bare / p)
    lo = math.log(market.strike / a_t) / s
    body = sp_integrate.quad(lambda x: (a_t * math.exp(s * x) - market.strike) * pdf(x), lo, x_c, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    if mode is TailMode.CAPPED:
        value = body + max(a_t * math.exp(s * x_c) - market.strike, 0.0) * (1 - p)
    else:
        value = body / p
    return value * math.exp(-market.rate * market.tenor)


class TestMarketParams:
    def test_sigma_t(self):
        m = MarketParams(50, 49, 0.03, 0.2, 4.0)
        assert m.sigma_t == pytest.approx(0.4)
        assert MarketParams.from_sigma_t(50, 49, 0.03, 0.4, 4.0).sigma == pytest.approx(0.2)

    @pytest.mark.parametrize("field", ["s0", "strike", "sigma", "tenor"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_non_positive(self, field, bad):
        with pytest.raises(ValueError):
            MARKET.with_(**{field: bad})

    def test_strike_now(self):
        assert MARKET.strike_now == pytest.approx(47.5518, abs=1e-4)


class TestDiscount:
    def test_examples(self):
        assert discount(12.3, 0.0, 2.0) == 12.3
        assert discount(49.0, 0.03, 1.0) == pytest.approx(47.55183, abs=1e-5)
        assert discount(12.3, 0.05, 0.0) == 12.3


class TestBlackScholes:
    def test_reference_price(self):
        assert black_scholes(MARKET).price_now == pytest.approx(7.12, abs=0.005)

    def test_closed_form_value(self):
        assert black_scholes(MARKET).price_now == pytest.approx(7.120513, abs=1e-6)

    def test_vanishing_volatility(self):
        m = MARKET.with_(sigma=1e-9)
        assert black_scholes(m).price_now == pytest.approx(50.0 - 49.0 * math.exp(-0.03), abs=1e-9)

    def test_parity(self):
        call, put = black_scholes(MARKET, "call"), black_scholes(MARKET, "put")
        assert abs(parity_gap(call, put, MARKET)) < 1e-12

    def test_price_relations(self):
        q = black_scholes(MARKET)
        assert q.price_now == pytest.approx(q.price_at_expiry * math.exp(-0.03), rel=1e-15)
        assert q.model is Model.BLACK_SCHOLES


class TestReferenceMarket:
    def test_capped_minus_truncated(self):
        capped = gosset_call(MARKET, 3.0, TailPolicy.capped(p=0.9999))
        truncated = gosset_call(MARKET, 3.0, TailPolicy.truncated(p=0.9999))
        assert 1.40 <= capped.price_now - truncated.price_now <= 1.60

    def test_cap_term(self):
        capped = gosset_call(MARKET, 3.0, TailPolicy.capped(p=0.9999))
        assert capped.cap_term == pytest.approx(3.14, abs=0.05)
        assert capped.lower_limit == pytest.approx(0.6583, abs=1e-3)

    @pytest.mark.parametrize("p", [0.99, 0.999, 0.9999])
    def test_nu_forty_premium(self, p):
        diff = gosset_call(MARKET, 40.0, TailPolicy.capped(p=p)).price_now - black_scholes(MARKET).price_now
        assert 0.05 <= diff <= 0.12


class TestAgainstIndependentQuadrature:
    @pytest.mark.parametrize("mode", list(TailMode))
    @pytest.mark.parametrize("nu", [2.65, 3.0, 5.0, 40.0])
    @pytest.mark.parametrize("p", [0.99, 0.9999])
    def test_call(self, mode, nu, p):
        got = gosset_call(MARKET, nu, TailPolicy(mode, p=p)).price_now
        assert got == pytest.approx(scipy_call(MARKET, nu, mode, p), rel=1e-8)


class TestParity:
    @pytest.mark.parametrize("mode", list(TailMode))
    @pytest.mark.parametrize("nu", [2.65, 5.0])
    @pytest.mark.parametrize("s0", [25.0, 75.0])
    def test_gap(self, mode, nu, s0):
        m = MARKET.with_(s0=s0)
        policy = TailPolicy(mode, p=0.999)
        gap = parity_gap(gosset_call(m, nu, policy), gosset_put(m, nu, policy), m)
        assert abs(gap) < PARITY_TOL

    def test_put_from_parity(self):
        policy = TailPolicy.capped(p=0.999)
        call = gosset_call(MARKET, 5.0, policy).price_now
        put = gosset_put(MARKET, 5.0, policy).price_now
        assert put == pytest.approx(call - 50.0 + 49.0 * math.exp(-0.03), abs=1e-9)

    def test_mismatched_quotes_rejected(self):
        call = gosset_call(MARKET, 5.0, TailPolicy.capped(p=0.999))
        put = gosset_put(MARKET, 5.0, TailPolicy.truncated(p=0.999))
        with pytest.raises(ValueError):
            parity_gap(call, put, MARKET)
        with pytest.raises(ValueError):
            parity_gap(put, call, MARKET)
        with pytest.raises(ValueError):
            parity_gap(call, black_scholes(MARKET, "put"), MARKET)

    @given(
        s0=st.floats(min_value=5.0, max_value=200.0),
        strike=st.floats(min_value=5.0, max_value=200.0),
        sigma_t=st.floats(min_value=0.05, max_value=0.8),
        nu=st.floats(min_value=2.2, max_value=80.0),
        p=st.floats(min_value=0.95, max_value=0.9999),
    )
    @settings(max_examples=30, deadline=None)
    def test_capped_property(self, s0, strike, sigma_t, nu, p):
        m = MarketParams.from_sigma_t(s0, strike, 0.03, sigma_t, 1.0)
        policy = TailPolicy.capped(p=p)
        gap = parity_gap(gosset_call(m, nu, policy), gosset_put(m, nu, policy), m)
        assert abs(gap) < PARITY_TOL


class TestLimits:
    @pytest.mark.parametrize("mode", list(TailMode))
    def test_tiny_strike_call_is_spot(self, mode):
        m = MARKET.with_(strike=1e-9)
        assert gosset_call(m, 4.0, TailPolicy(mode, p=0.999)).price_now == pytest.approx(50.0, abs=1e-6)

    @pytest.mark.parametrize("mode", list(TailMode))
    def test_tiny_strike_put_is_zero(self, mode):
        m = MARKET.with_(strike=1e-9)
        assert gosset_put(m, 4.0, TailPolicy(mode, p=0.999)).price_now == pytest.approx(0.0, abs=1e-12)

    def test_worthless_asset_put(self):
        m = MARKET.with_(s0=1e-9)
        assert gosset_put(m, 4.0, TailPolicy.capped(p=0.999)).price_now == pytest.approx(49.0 * math.exp(-0.03), abs=1e-6)

    def test_worthless_asset_truncated_put_is_rejected(self):
        # the strike ends up above the truncation point
        with pytest.raises(StrikeAboveTruncationError):
            gosset_put(MARKET.with_(s0=1e-9), 4.0, TailPolicy.truncated(p=0.999))

    def test_large_nu_approaches_black_scholes(self):
        got = gosset_call(MARKET, 500.0, TailPolicy.capped(p=0.999999)).price_now
        assert abs(got - black_scholes(MARKET).price_now) < 0.05

    def test_strike_above_cap_call(self):
        # L >= x_c: only the cap term remains, and it is zero when the cap is below the strike
        q = gosset_call(MARKET.with_(strike=1e4), 40.0, TailPolicy.capped(p=0.99))
        assert q.price_now == 0.0
        assert q.limit >= q.scale.x_c

    def test_strike_above_truncation_put(self):
        with pytest.raises(StrikeAboveTruncationError):
            gosset_put(MARKET.with_(strike=1e4), 40.0, TailPolicy.truncated(p=0.99))

    def test_strike_above_cap_put_keeps_parity(self):
        m = MARKET.with_(strike=1e4)
        policy = TailPolicy.capped(p=0.99)
        gap = parity_gap(gosset_call(m, 40.0, policy), gosset_put(m, 40.0, policy), m)
        assert abs(gap) < PARITY_TOL


class TestShape:
    def test_call_falls_with_nu(self):
        prices = [gosset_call(MARKET, nu, TailPolicy.capped(p=0.999)).price_now for nu in (3, 5, 10, 40)]
        assert all(a > b for a, b in zip(prices, prices[1:]))

    def test_capped_call_rises_with_p(self):
        prices = [gosset_call(MARKET, 3.0, TailPolicy.capped(p=p)).price_now for p in (0.99, 0.999, 0.9999, 0.99999)]
        assert all(a < b for a, b in zip(prices, prices[1:]))

    def test_capped_above_truncated(self):
        for nu in (3.0, 5.0):
            c = gosset_call(MARKET, nu, TailPolicy.capped(p=0.999)).price_now
            t = gosset_call(MARKET, nu, TailPolicy.truncated(p=0.999)).price_now
            assert c > t

    @given(st.floats(min_value=10.0, max_value=90.0), st.floats(min_value=10.0, max_value=90.0))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_spot(self, a, b):
        lo, hi = sorted((a, b))
        policy = TailPolicy.capped(p=0.999)
        c_lo = gosset_call(MARKET.with_(s0=lo), 5.0, policy).price_now
        c_hi = gosset_call(MARKET.with_(s0=hi), 5.0, policy).price_now
        assert c_hi >= c_lo - 1e-10

    @given(st.floats(min_value=1.0, max_value=200.0))
    @settings(max_examples=25, deadline=None)
    def test_no_arbitrage_bounds(self, strike):
        m = MARKET.with_(strike=strike)
        policy = TailPolicy.capped(p=0.999)
        call = gosset_call(m, 4.0, policy).price_now
        put = gosset_put(m, 4.0, policy).price_now
        assert max(50.0 - m.strike_now, 0.0) - 1e-9 <= call <= 50.0 + 1e-9
        assert max(m.strike_now - 50.0, 0.0) - 1e-9 <= put <= m.strike_now + 1e-9

    def test_quote_relations(self):
        policy = resolve_policy(TailPolicy.truncated(p=0.999), 5.0)
        for kind in OptionKind:
            q = gosset_price(MARKET, 5.0, policy, kind)
            assert q.price_now == pytest.approx(q.price_at_expiry * math.exp(-0.03), rel=1e-15)
            assert q.price_now >= 0
            assert q.kind is kind and q.model is Model.GOSSET_TRUNCATED
