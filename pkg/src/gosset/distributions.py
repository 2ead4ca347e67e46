"""Student's t and normal distributions, and the log-t asset density.

Everything here works with the standardised t (location 0, scale 1);
location and scale enter only through calibration and through the asset
representation ``S_t = A_t * exp(sigma_t * xi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import ln_gamma, ln_gamma_half_ratio, regularized_incomplete_beta

__all__ = [
    "TParams",
    "LogTParams",
    "lambda_nu",
    "log_lambda_nu",
    "t_pdf",
    "t_cdf",
    "t_sf",
    "t_quantile",
    "t_variance",
    "normal_pdf",
    "normal_cdf",
    "normal_sf",
    "normal_quantile",
    "log_t_pdf",
]


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not nu > 0 or math.isnan(nu):
        raise ValueError(f"nu must be > 0, got {nu}")
    return nu


@dataclass(frozen=True)
class TParams:
    """Location-scale Student's t: shape ``nu``, location ``mu``, scale ``sigma``."""

    nu: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        _check_nu(self.nu)
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def variance(self) -> float:
        return t_variance(self.nu) * self.sigma**2


@dataclass(frozen=True)
class LogTParams:
    """Asset ``S_t = a_t * exp(sigma_t * xi)`` with ``xi ~ t(nu)``."""

    a_t: float
    sigma_t: float
    nu: float

    def __post_init__(self) -> None:
        if not self.a_t > 0:
            raise ValueError(f"a_t must be > 0, got {self.a_t}")
        if not self.sigma_t > 0:
            raise ValueError(f"sigma_t must be > 0, got {self.sigma_t}")
        _check_nu(self.nu)


def log_lambda_nu(nu: float) -> float:
    nu = _check_nu(nu)
    if math.isinf(nu):
        return -0.5 * math.log(2.0 * math.pi)
    return ln_gamma_half_ratio(0.5 * nu) - 0.5 * math.log(math.pi * nu)


def lambda_nu(nu: float) -> float:
    """Normalisation constant ``Γ((ν+1)/2) / (Γ(ν/2) sqrt(πν))`` of the t pdf."""
    return math.exp(log_lambda_nu(nu))


def t_pdf(xi, nu: float):
    """Density of the standard t-distribution with ``nu`` degrees of freedom."""
    nu = _check_nu(nu)
    xi = np.asarray(xi, dtype=float)
    # log1p((xi/sqrt(nu))^2) without overflowing xi*xi
    u = np.abs(xi) / math.sqrt(nu)
    with np.errstate(over="ignore", divide="ignore"):
        log_w = np.where(u < 1e150, np.log1p(u * u), 2.0 * np.log(u))
    out = np.exp(log_lambda_nu(nu) - 0.5 * (nu + 1.0) * log_w)
    return float(out) if out.ndim == 0 else out


def _lower_tail(x: np.ndarray, nu: float) -> np.ndarray:
    """P{xi <= -|x|}, accurate far into the tail."""
    out = np.empty_like(x, dtype=float)
    # nu/(nu+x^2) rounds towards 1 when x^2 << nu; switch to the
    # complemented function of x^2/(nu+x^2) there.
    with np.errstate(over="ignore"):
        x2 = x * x
    big = x2 >= nu / 16.0
    if np.any(big):
        out[big] = 0.5 * regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + x2[big]))
    small = ~big
    if np.any(small):
        w = x2[small] / (nu + x2[small])
        # 0.5 - 0.5 I_w(1/2, nu/2) is accurate while the tail is not small;
        # the slower complemented routine covers the rest.
        fast = 0.5 - 0.5 * regularized_incomplete_beta(0.5, 0.5 * nu, w)
        thin = fast < 0.05
        if np.any(thin):
            fast[thin] = 0.5 * regularized_incomplete_beta(0.5, 0.5 * nu, w[thin], complement=True)
        out[small] = fast
    return out


def t_cdf(x, nu: float):
    """P{xi <= x} for the standard t-distribution."""
    nu = _check_nu(nu)
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x)
    tail = _lower_tail(flat, nu)
    out = np.where(flat <= 0, tail, 1.0 - tail)
    out = out.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def t_sf(x, nu: float):
    """P{xi > x}; keeps relative accuracy in the upper tail."""
    nu = _check_nu(nu)
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x)
    tail = _lower_tail(flat, nu)
    out = np.where(flat >= 0, tail, 1.0 - tail).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def _quantile_guess(tail: np.ndarray, nu: float) -> np.ndarray:
    """Starting point for the upper-tail root of ``P{xi > x} = tail``."""
    z = -special.ndtri(tail)
    # Cornish-Fisher expansion about the normal quantile.
    body = z + (z**3 + z) / (4.0 * nu) + (5 * z**5 + 16 * z**3 + 3 * z) / (96.0 * nu**2)
    # Power-law tail: P{xi > x} ~ Lambda * nu**((nu - 1) / 2) * x**-nu / nu ... solved for x.
    log_c = log_lambda_nu(nu) + 0.5 * (nu - 1.0) * math.log(nu) - math.log(nu)
    with np.errstate(over="ignore"):
        far = np.exp((log_c - np.log(tail)) / nu)
    return np.clip(np.maximum(body, far), 1e-3, 1e300)


def t_quantile(p, nu: float, *, max_iter: int = 100):
    """Inverse of :func:`t_cdf`.

    Solves on the tail nearest ``p`` with safeguarded Newton steps on
    ``log P{xi > x} - log(tail)``. A bracket ``[lo, hi]`` is kept around the
    root and any Newton step leaving it is replaced by bisection. Works
    element-wise on arrays.
    """
    nu = _check_nu(nu)
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ValueError("quantile probability must lie strictly in (0, 1)")
    flat = np.atleast_1d(p).ravel()
    tail = np.minimum(flat, 1.0 - flat)
    sign = np.where(flat < 0.5, -1.0, 1.0)
    x = np.zeros_like(tail)

    idx = np.flatnonzero(tail < 0.5)
    target = np.log(tail[idx])
    guess = _quantile_guess(tail[idx], nu)
    lo = np.zeros_like(guess)
    hi = guess * 1.25
    while True:
        with np.errstate(divide="ignore"):
            short = np.log(t_sf(hi, nu)) > target
        if not np.any(short):
            break
        lo[short] = hi[short]
        hi[short] *= 2.0
        if np.any(hi > 1e300):
            raise ArithmeticError("quantile bracket overflow")
    guess = np.clip(guess, lo, hi)

    cur = guess
    for _ in range(max_iter):
        if idx.size == 0:
            break
        sf = t_sf(cur, nu)
        with np.errstate(divide="ignore"):
            g = np.log(sf) - target
        above = g > 0
        lo = np.where(above, cur, lo)
        hi = np.where(above, hi, cur)
        # Halley step on h = log sf - target: h' = -pdf/sf,
        # h'' = h' * (h' + (nu+1) x / (nu + x^2)) ... sign folded in below.
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            r = t_pdf(cur, nu) / sf
            d1 = -r
            d2 = r * ((nu + 1.0) * cur / (nu + cur * cur) - r)
            newton = cur - 2.0 * g * d1 / (2.0 * d1 * d1 - g * d2)
            newton = np.where(np.isfinite(newton), newton, cur + g / r)
        inside = (newton >= lo) & (newton <= hi)
        nxt = np.where(inside, newton, 0.5 * (lo + hi))
        nxt = np.where(g == 0, cur, nxt)
        # log sf is only known to a few ulps, which bounds the attainable step.
        floor = 8.0 * np.finfo(float).eps / np.where(r > 0, r, np.inf)
        done = (np.abs(nxt - cur) <= 2e-15 * nxt + floor) | (hi - lo <= 2e-15 * hi)
        x[idx[done]] = nxt[done]
        keep = ~done
        idx, target, lo, hi, cur = idx[keep], target[keep], lo[keep], hi[keep], nxt[keep]
    if idx.size:
        x[idx] = cur
    out = (sign * x).reshape(p.shape)
    return float(out) if out.ndim == 0 else out


def t_variance(nu: float) -> float:
    """Variance ``nu / (nu - 2)`` of the standard t; infinite for ``nu <= 2``."""
    nu = float(nu)
    if not nu > 2:
        raise ValueError(f"t variance is undefined for nu <= 2, got {nu}")
    if math.isinf(nu):
        return 1.0
    return nu / (nu - 2.0)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_sf(x):
    out = special.ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ValueError("quantile probability must lie strictly in (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def log_t_pdf(s, params: LogTParams):
    """Density of the asset value ``s`` when ``ln(s / a_t) / sigma_t ~ t(nu)``.

    Includes the ``1 / (sigma_t * s)`` Jacobian of the change of variables.
    """
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError("asset value must be > 0")
    xi = np.log(s / params.a_t) / params.sigma_t
    out = np.asarray(t_pdf(xi, params.nu)) / (params.sigma_t * s)
    return float(out) if out.ndim == 0 else out
