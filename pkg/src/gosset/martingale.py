"""Risk-neutral scale of the log-t asset under a cap or a truncation.

For small ``nu`` the expectation of ``exp(sigma_T * xi)`` diverges, so the
upper tail of the t-distribution has to be handled by a :class:`TailPolicy`:

* ``CAPPED``: the asset is limited to ``A_T * exp(sigma_T * x_c)``; the tail
  mass ``1 - p`` sits at the cap.
* ``TRUNCATED``: the density is zero above ``x_c`` and renormalised by ``1/p``.

``A_T`` is then fixed by requiring ``E{S_T} = S_0 * exp(r * T)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .distributions import LogTParams, log_lambda_nu, log_t_pdf, t_cdf, t_quantile, t_sf
from .numerics import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, Interval, integrate

if TYPE_CHECKING:
    from .pricing import MarketParams

__all__ = [
    "TailMode",
    "TailPolicy",
    "MartingaleScale",
    "growth_integral",
    "resolve_policy",
    "martingale_scale",
    "expected_asset_value",
    "lognormal_scale",
]


class TailMode(str, enum.Enum):
    CAPPED = "capped"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class TailPolicy:
    """How the upper tail is bounded: a confidence level ``p`` or a critical value ``x_c``.

    Give exactly one of the two; :func:`resolve_policy` fills in the other.
    """

    mode: TailMode
    p: float | None = None
    x_c: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", TailMode(self.mode))
        if self.p is None and self.x_c is None:
            raise ValueError("tail policy needs p or x_c")
        if self.p is not None and not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.x_c is not None and math.isnan(self.x_c):
            raise ValueError("x_c must not be NaN")

    @classmethod
    def capped(cls, p: float | None = None, x_c: float | None = None) -> "TailPolicy":
        return cls(TailMode.CAPPED, p, x_c)

    @classmethod
    def truncated(cls, p: float | None = None, x_c: float | None = None) -> "TailPolicy":
        return cls(TailMode.TRUNCATED, p, x_c)

    @property
    def resolved(self) -> bool:
        return self.p is not None and self.x_c is not None

    @property
    def tail_mass(self) -> float:
        """Probability ``1 - p`` above the critical value."""
        if self.p is None:
            raise ValueError("policy is not resolved")
        return 1.0 - self.p


@dataclass(frozen=True)
class MartingaleScale:
    """``A_T`` together with the pieces it was built from.

    ``z`` is the bare growth integral (divided by ``p`` for truncation) and
    ``denominator`` is what ``S_0 exp(rT)`` is divided by: ``z + (1-p) exp(sigma_T x_c)``
    when capped, ``z`` when truncated.
    """

    a_t: float
    z: float
    denominator: float
    x_c: float
    p: float


def resolve_policy(policy: TailPolicy, nu: float) -> TailPolicy:
    """Populate both ``p`` and ``x_c`` so they satisfy ``P{xi <= x_c} = p``."""
    if policy.p is not None and policy.x_c is not None:
        return policy
    if policy.p is not None:
        return replace(policy, x_c=t_quantile(policy.p, nu))
    p = t_cdf(policy.x_c, nu)
    if not 0.0 < p < 1.0:
        raise ValueError(f"x_c={policy.x_c} gives p={p}, outside (0, 1)")
    return replace(policy, p=p)


def _growth_integrand(sigma_t: float, nu: float):
    log_norm = log_lambda_nu(nu)
    if math.isinf(nu):
        def normal(xi):
            return np.exp(log_norm + sigma_t * xi - 0.5 * xi * xi)

        return normal
    half_power = 0.5 * (nu + 1.0)
    root_nu = math.sqrt(nu)

    def f(xi):
        u = np.abs(xi) / root_nu
        return np.exp(log_norm + sigma_t * xi - half_power * np.log1p(u * u))

    return f


def growth_integral(
    sigma_t: float,
    nu: float,
    domain: Interval,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> float:
    """Integral of ``exp(sigma_t * xi) * t_pdf(xi, nu)`` over ``domain``.

    The upper limit must be finite: with fat tails the integral over the
    whole real line diverges. ``nu = inf`` selects the normal density, for
    which any domain is allowed and the whole line gives ``exp(sigma_t^2 / 2)``.
    """
    if not sigma_t > 0:
        raise ValueError(f"sigma_t must be > 0, got {sigma_t}")
    if math.isinf(nu):
        # the integrand is a normal bump centred on sigma_t
        points = [0.0, sigma_t]
        f = _growth_integrand(sigma_t, nu)
        return integrate(f, domain, rel_tol, abs_tol, points=points).value
    if math.isinf(domain.upper):
        raise ValueError("growth integral diverges for an infinite upper limit; cap or truncate")
    points = [0.0]
    # The integrand peaks where sigma_t = (nu+1) xi / (nu + xi^2).
    disc = (nu + 1.0) ** 2 - 4.0 * sigma_t**2 * nu
    if disc >= 0:
        points.append((nu + 1.0 - math.sqrt(disc)) / (2.0 * sigma_t))
    result = integrate(_growth_integrand(sigma_t, nu), domain, rel_tol, abs_tol, points=points)
    return result.value


def _check_market(market: "MarketParams") -> None:
    if not market.s0 > 0:
        raise ValueError("S0 must be > 0")
    if not market.tenor > 0:
        raise ValueError("tenor must be > 0")
    if not market.sigma_t > 0:
        raise ValueError("sigma_T must be > 0")


def martingale_scale(market: "MarketParams", nu: float, policy: TailPolicy) -> MartingaleScale:
    """Solve the fair-wager condition for ``A_T``.

    Capped: ``A_T = S0 e^{rT} / (Z + (1-p) exp(sigma_T x_c))``.
    Truncated: ``A_T = S0 e^{rT} / Z`` where ``Z`` carries the ``1/p`` factor.
    """
    _check_market(market)
    if not policy.resolved:
        policy = resolve_policy(policy, nu)
    sigma_t = market.sigma_t
    bare = growth_integral(sigma_t, nu, Interval(-math.inf, policy.x_c))
    forward = market.s0 * math.exp(market.rate * market.tenor)
    if policy.mode is TailMode.CAPPED:
        z = bare
        # exp(sigma_T x_c) (1-p) combined in log space
        denominator = z + math.exp(sigma_t * policy.x_c + math.log(policy.tail_mass))
    else:
        z = bare / policy.p
        denominator = z
    return MartingaleScale(forward / denominator, z, denominator, policy.x_c, policy.p)


def lognormal_scale(market: "MarketParams") -> MartingaleScale:
    """Normal-pdf limit: ``Z = exp(sigma_T^2 / 2)`` and no tail."""
    _check_market(market)
    z = math.exp(0.5 * market.sigma_t**2)
    a_t = market.s0 * math.exp(market.rate * market.tenor - 0.5 * market.sigma_t**2)
    return MartingaleScale(a_t, z, z, math.inf, 1.0)


def expected_asset_value(
    scale: MartingaleScale, market: "MarketParams", nu: float, policy: TailPolicy
) -> float:
    """Re-evaluate ``E{S_T}`` under the policy distribution.

    Integrates ``s * pdf(s)`` with the log-t asset density up to the critical
    value and adds the capped tail from the t survival function, so it does
    not share the code path that produced ``scale``.
    """
    if not policy.resolved:
        policy = resolve_policy(policy, nu)
    sigma_t = market.sigma_t
    params = LogTParams(scale.a_t, sigma_t, nu)

    def integrand(xi):
        s = scale.a_t * np.exp(sigma_t * np.asarray(xi, dtype=float))
        out = np.zeros_like(s)
        pos = s > 0
        # ds = sigma_t * s * dxi
        out[pos] = s[pos] * log_t_pdf(s[pos], params) * sigma_t * s[pos]
        return out

    body = integrate(integrand, Interval(-math.inf, policy.x_c), points=[0.0]).value
    if policy.mode is TailMode.CAPPED:
        return body + scale.a_t * math.exp(sigma_t * policy.x_c) * t_sf(policy.x_c, nu)
    return body / t_cdf(policy.x_c, nu)
