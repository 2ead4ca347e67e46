"""European call and put prices under the log-t (Gosset) model and Black-Scholes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import log_lambda_nu, normal_cdf, t_cdf, t_sf
from .martingale import (
    MartingaleScale,
    TailMode,
    TailPolicy,
    lognormal_scale,
    martingale_scale,
    resolve_policy,
)
from .numerics import Interval, integrate

__all__ = [
    "MarketParams",
    "OptionKind",
    "Model",
    "Quote",
    "StrikeAboveTruncationError",
    "gosset_call",
    "gosset_put",
    "gosset_price",
    "black_scholes",
    "parity_gap",
    "discount",
]


class OptionKind(str, enum.Enum):
    CALL = "call"
    PUT = "put"


class Model(str, enum.Enum):
    GOSSET_CAPPED = "gosset-capped"
    GOSSET_TRUNCATED = "gosset-truncated"
    BLACK_SCHOLES = "black-scholes"


class StrikeAboveTruncationError(ValueError):
    """Truncated put requested with ``ln(K_T/A_T)/sigma_T >= x_c``."""


@dataclass(frozen=True)
class MarketParams:
    """Spot ``s0``, strike at expiry, risk-free ``rate``, annual ``sigma`` and ``tenor`` in years."""

    s0: float
    strike: float
    rate: float
    sigma: float
    tenor: float

    def __post_init__(self) -> None:
        for name in ("s0", "strike", "sigma", "tenor"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if not math.isfinite(self.rate):
            raise ValueError(f"rate must be finite, got {self.rate}")

    @classmethod
    def from_sigma_t(cls, s0: float, strike: float, rate: float, sigma_t: float, tenor: float) -> "MarketParams":
        """Build from the horizon volatility ``sigma_T = sigma * sqrt(T)``."""
        return cls(s0, strike, rate, sigma_t / math.sqrt(tenor), tenor)

    @property
    def sigma_t(self) -> float:
        return self.sigma * math.sqrt(self.tenor)

    @property
    def discount_factor(self) -> float:
        return math.exp(-self.rate * self.tenor)

    @property
    def strike_now(self) -> float:
        """``K_0 = K_T exp(-rT)``."""
        return self.strike * self.discount_factor

    def with_(self, **changes) -> "MarketParams":
        fields = dict(s0=self.s0, strike=self.strike, rate=self.rate, sigma=self.sigma, tenor=self.tenor)
        fields.update(changes)
        return MarketParams(**fields)


@dataclass(frozen=True)
class Quote:
    """Option price at expiry and today, with the diagnostics behind it.

    ``limit`` is ``ln(K_T / A_T) / sigma_T``: the lower integration limit for
    a call and the upper one for a put. ``cap_term`` is the part of a capped
    call's expiry value coming from asset values above the cap.
    """

    price_at_expiry: float
    price_now: float
    scale: MartingaleScale
    limit: float
    kind: OptionKind
    model: Model
    nu: float | None = None
    cap_term: float = 0.0

    @property
    def lower_limit(self) -> float:
        return self.limit


def discount(value_at_t: float, rate: float, tenor: float) -> float:
    if tenor < 0:
        raise ValueError("tenor must be >= 0")
    return value_at_t * math.exp(-rate * tenor)


def _model_for(policy: TailPolicy) -> Model:
    return Model.GOSSET_CAPPED if policy.mode is TailMode.CAPPED else Model.GOSSET_TRUNCATED


def _payoff_integrand(a_t: float, strike: float, sigma_t: float, nu: float, sign: float):
    """``sign * (A_T exp(sigma_T xi) - K_T) * t_pdf(xi)``."""
    log_norm = log_lambda_nu(nu)
    half_power = 0.5 * (nu + 1.0)
    root_nu = math.sqrt(nu)

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        u = np.abs(xi) / root_nu
        with np.errstate(over="ignore"):
            density = np.exp(log_norm - half_power * np.log1p(u * u))
            asset = a_t * np.exp(sigma_t * xi)
        return sign * (asset - strike) * density

    return f


def _prepare(market: MarketParams, nu: float, policy: TailPolicy):
    if not nu > 0:
        raise ValueError(f"nu must be > 0, got {nu}")
    policy = resolve_policy(policy, nu)
    scale = martingale_scale(market, nu, policy)
    limit = math.log(market.strike / scale.a_t) / market.sigma_t
    return policy, scale, limit


def gosset_call(market: MarketParams, nu: float, policy: TailPolicy) -> Quote:
    """Call price with the upper tail capped or truncated at ``x_c``.

    Capped::

        C_T = int_L^{x_c} (A_T e^{sigma_T xi} - K_T) pdf dxi
              + (A_T e^{sigma_T x_c} - K_T)^+ (1 - p)

    Truncated drops the second term and divides the integral by ``p``.
    If the strike lies above the cap (``L >= x_c``) the integral is empty.
    """
    policy, scale, limit = _prepare(market, nu, policy)
    sigma_t = market.sigma_t
    x_c = policy.x_c
    body = 0.0
    if limit < x_c:
        f = _payoff_integrand(scale.a_t, market.strike, sigma_t, nu, 1.0)
        body = integrate(f, Interval(limit, x_c), points=[0.0]).value
    cap_term = 0.0
    if policy.mode is TailMode.CAPPED:
        cap_value = scale.a_t * math.exp(sigma_t * x_c)
        cap_term = max(cap_value - market.strike, 0.0) * policy.tail_mass
        at_expiry = body + cap_term
    else:
        at_expiry = body / policy.p
    at_expiry = max(at_expiry, 0.0)
    return Quote(
        at_expiry,
        discount(at_expiry, market.rate, market.tenor),
        scale,
        limit,
        OptionKind.CALL,
        _model_for(policy),
        nu,
        cap_term,
    )


def gosset_put(market: MarketParams, nu: float, policy: TailPolicy) -> Quote:
    """Put price ``P_T = int_{-inf}^{L} (K_T - A_T e^{sigma_T xi}) pdf dxi``.

    ``A_T`` comes from the same policy as the call. Under truncation the
    density carries ``1/p`` and the strike must sit below the truncation
    point. Under a cap with ``L >= x_c`` the asset above the cap is held at
    the cap value, which keeps put-call parity exact.
    """
    policy, scale, limit = _prepare(market, nu, policy)
    sigma_t = market.sigma_t
    x_c = policy.x_c
    f = _payoff_integrand(scale.a_t, market.strike, sigma_t, nu, -1.0)
    if policy.mode is TailMode.TRUNCATED:
        if limit >= x_c:
            raise StrikeAboveTruncationError(
                f"strike limit {limit:.6g} is not below truncation point x_c={x_c:.6g}"
            )
        at_expiry = integrate(f, Interval(-math.inf, limit), points=[0.0]).value / policy.p
    elif limit < x_c:
        at_expiry = integrate(f, Interval(-math.inf, limit), points=[0.0]).value
    else:
        body = integrate(f, Interval(-math.inf, x_c), points=[0.0]).value
        cap_value = scale.a_t * math.exp(sigma_t * x_c)
        at_expiry = body + (market.strike - cap_value) * policy.tail_mass
    at_expiry = max(at_expiry, 0.0)
    return Quote(
        at_expiry,
        discount(at_expiry, market.rate, market.tenor),
        scale,
        limit,
        OptionKind.PUT,
        _model_for(policy),
        nu,
    )


def gosset_price(market: MarketParams, nu: float, policy: TailPolicy, kind: OptionKind | str) -> Quote:
    kind = OptionKind(kind)
    return gosset_call(market, nu, policy) if kind is OptionKind.CALL else gosset_put(market, nu, policy)


def black_scholes(market: MarketParams, kind: OptionKind | str = OptionKind.CALL) -> Quote:
    """Closed-form Black-Scholes price; the put follows from parity."""
    kind = OptionKind(kind)
    sigma_t = market.sigma_t
    d1 = (math.log(market.s0 / market.strike) + market.rate * market.tenor + 0.5 * sigma_t**2) / sigma_t
    d2 = d1 - sigma_t
    call_now = market.s0 * normal_cdf(d1) - market.strike_now * normal_cdf(d2)
    if kind is OptionKind.CALL:
        now = call_now
    else:
        now = call_now - market.s0 + market.strike_now
    scale = lognormal_scale(market)
    limit = math.log(market.strike / scale.a_t) / sigma_t
    return Quote(
        now / market.discount_factor, now, scale, limit, kind, Model.BLACK_SCHOLES
    )


def parity_gap(call: Quote, put: Quote, market: MarketParams) -> float:
    """``C_0 - P_0 - (S_0 - K_T e^{-rT})``; zero up to quadrature error."""
    if call.kind is not OptionKind.CALL or put.kind is not OptionKind.PUT:
        raise ValueError("parity_gap needs a call and a put")
    if call.model is not put.model or call.nu != put.nu or call.scale != put.scale:
        raise ValueError("call and put were priced under different models or policies")
    return call.price_now - put.price_now - (market.s0 - market.strike_now)
