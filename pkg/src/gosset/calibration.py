"""Fitting normal and Student's t location-scale models to daily returns."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .distributions import TParams, normal_quantile, normal_sf, t_quantile, t_sf

__all__ = [
    "ReturnSeries",
    "NormalFit",
    "TFit",
    "FitResult",
    "DegenerateSeriesError",
    "FitConvergenceError",
    "log_returns",
    "load_series",
    "fit_normal",
    "fit_t",
    "fit",
    "t_negative_log_likelihood",
    "critical_report",
    "tail_mass_ratio",
    "DEFAULT_Q_LEVELS",
    "MIN_FIT_LENGTH",
]

MIN_FIT_LENGTH = 30
DEFAULT_Q_LEVELS = (1e-4, 1e-3, 1e-2)
NU_BOUNDS = (0.5, 200.0)


class DegenerateSeriesError(ValueError):
    """Series too short, non-finite, or without spread."""


class FitConvergenceError(RuntimeError):
    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class ReturnSeries:
    returns: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.returns, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise DegenerateSeriesError("returns must be finite")
        object.__setattr__(self, "returns", arr)

    def __len__(self) -> int:
        return self.returns.size

    def scaled(self, factor: float) -> "ReturnSeries":
        return ReturnSeries(self.returns * factor, self.label)


@dataclass(frozen=True)
class NormalFit:
    mu: float
    sigma: float
    mu_se: float
    sigma_se: float


@dataclass(frozen=True)
class TFit:
    params: TParams
    mu_se: float
    sigma_se: float
    nu_se: float
    neg_log_likelihood: float
    iterations: int = 0

    @property
    def nu(self) -> float:
        return self.params.nu

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def sigma(self) -> float:
        return self.params.sigma


@dataclass(frozen=True)
class FitResult:
    """Both fits and the sample statistics, in the layout of a Table-I style report."""

    normal: NormalFit
    student_t: TFit
    count: int
    sample_mean: float
    sample_std: float
    critical_values: dict = field(default_factory=dict)
    label: str = ""

    def to_dict(self) -> dict:
        t = self.student_t
        return {
            "label": self.label,
            "normal": {
                "mu": self.normal.mu,
                "mu_se": self.normal.mu_se,
                "sigma": self.normal.sigma,
                "sigma_se": self.normal.sigma_se,
            },
            "t": {
                "mu": t.mu,
                "mu_se": t.mu_se,
                "sigma": t.sigma,
                "sigma_se": t.sigma_se,
                "nu": t.nu,
                "nu_se": t.nu_se,
            },
            "critical_values": [
                {"q": q, "normal": row["normal"], "t": row["t"]}
                for q, row in sorted(self.critical_values.items())
            ],
            "count": self.count,
            "sample_mean": self.sample_mean,
            "sample_std": self.sample_std,
        }


def log_returns(prices: Sequence[float], label: str = "") -> ReturnSeries:
    """Daily log returns ``ln(P[i+1] / P[i])``."""
    arr = np.asarray(prices, dtype=float).ravel()
    if arr.size < 2:
        raise DegenerateSeriesError("need at least two prices")
    if np.any(~(arr > 0)):
        raise ValueError("prices must be positive")
    return ReturnSeries(np.diff(np.log(arr)), label)


def load_series(path: str | Path) -> ReturnSeries:
    """Read a return series from CSV.

    Two layouts are recognised by header: ``date,close`` (prices, converted
    to log returns) or a ``return`` column of precomputed returns.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: missing header row")
        header = {name.strip().lower(): name for name in reader.fieldnames}
        rows = list(reader)
    if "return" in header:
        column, is_price = header["return"], False
    elif "close" in header and "date" in header:
        column, is_price = header["close"], True
    else:
        raise ValueError(f"{path}: expected a 'date,close' or 'return' header, got {reader.fieldnames}")
    try:
        values = [float(row[column]) for row in rows if row[column] not in (None, "")]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed number in column {column!r}: {exc}") from None
    if is_price:
        return log_returns(values, label=path.stem)
    return ReturnSeries(np.array(values), label=path.stem)


def _check_fittable(series: ReturnSeries) -> np.ndarray:
    x = series.returns
    if x.size and np.ptp(x) == 0:
        raise DegenerateSeriesError("degenerate series: zero variance")
    if x.size < MIN_FIT_LENGTH:
        raise DegenerateSeriesError(f"degenerate series: need at least {MIN_FIT_LENGTH} returns, got {x.size}")
    return x


def fit_normal(series: ReturnSeries) -> NormalFit:
    x = _check_fittable(series)
    n = x.size
    mu = float(np.mean(x))
    sigma = float(np.std(x))
    return NormalFit(mu, sigma, sigma / math.sqrt(n), sigma / math.sqrt(2.0 * n))


def t_negative_log_likelihood(params: TParams, returns) -> float:
    """Negative log-likelihood of location-scale t data."""
    x = np.asarray(returns, dtype=float)
    z = (x - params.mu) / params.sigma
    nu = params.nu
    log_norm = special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu) - 0.5 * math.log(math.pi * nu)
    return float(
        -x.size * (log_norm - math.log(params.sigma)) + 0.5 * (nu + 1) * np.sum(np.log1p(z * z / nu))
    )


def _nll_and_grad(theta: np.ndarray, z: np.ndarray):
    """NLL of standardised data in ``(mu, log sigma, log nu)`` with its gradient."""
    mu, log_sigma, log_nu = theta
    sigma = math.exp(log_sigma)
    nu = math.exp(log_nu)
    n = z.size
    u = (z - mu) / sigma
    w = 1.0 + u * u / nu
    log_norm = special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu) - 0.5 * math.log(math.pi * nu)
    nll = -n * (log_norm - log_sigma) + 0.5 * (nu + 1) * np.sum(np.log(w))

    ratio = u / w
    d_mu = -(nu + 1) / (nu * sigma) * np.sum(ratio)
    d_sigma = n / sigma - (nu + 1) / (nu * sigma) * np.sum(u * ratio)
    d_nu = (
        -n * (0.5 * special.digamma(0.5 * (nu + 1)) - 0.5 * special.digamma(0.5 * nu) - 0.5 / nu)
        + 0.5 * np.sum(np.log(w))
        - 0.5 * (nu + 1) / nu**2 * np.sum(u * u / w)
    )
    grad = np.array([d_mu, d_sigma * sigma, d_nu * nu])
    return float(nll), grad


def _natural_grad(params: np.ndarray, z: np.ndarray) -> np.ndarray:
    mu, sigma, nu = params
    _, g = _nll_and_grad(np.array([mu, math.log(sigma), math.log(nu)]), z)
    return np.array([g[0], g[1] / sigma, g[2] / nu])


def _observed_information(params: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Hessian of the NLL in ``(mu, sigma, nu)`` by central differences of the gradient."""
    hess = np.empty((3, 3))
    for i in range(3):
        h = 1e-5 * max(abs(params[i]), 1.0 if i == 0 else params[i])
        up = params.copy()
        down = params.copy()
        up[i] += h
        down[i] -= h
        hess[:, i] = (_natural_grad(up, z) - _natural_grad(down, z)) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def fit_t(series: ReturnSeries, *, nu_start: float = 4.0, method: str = "mle") -> TFit:
    """Fit a location-scale t-distribution.

    ``method="mle"`` maximises the likelihood of the raw returns with ``nu``
    searched in log space on ``[0.5, 200]``; standard errors come from the
    inverse observed information. ``method="histogram"`` instead least-squares
    fits the density to a histogram of the returns and is kept for comparison
    (its standard errors come from the same information matrix).
    """
    x = _check_fittable(series)
    # Standardise so the optimisation is scale free.
    centre = float(np.median(x))
    spread = float(np.std(x))
    z = (x - centre) / spread

    log_nu_bounds = (math.log(NU_BOUNDS[0]), math.log(NU_BOUNDS[1]))
    start = np.array([0.0, math.log(0.8), math.log(nu_start)])
    if method == "mle":
        res = optimize.minimize(
            _nll_and_grad,
            start,
            args=(z,),
            jac=True,
            method="L-BFGS-B",
            bounds=[(None, None), (None, None), log_nu_bounds],
            options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 2000},
        )
        theta, success, nit, message = res.x, res.success, res.nit, res.message
    elif method == "histogram":
        theta, success, nit, message = _fit_histogram(z, start, log_nu_bounds)
    else:
        raise ValueError(f"unknown fit method {method!r}")
    if not success or not np.all(np.isfinite(theta)):
        raise FitConvergenceError(f"t fit did not converge: {message}", _to_params(theta, centre, spread))

    mu_z, log_sigma_z, log_nu = theta
    nat = np.array([mu_z, math.exp(log_sigma_z), math.exp(log_nu)])
    info = _observed_information(nat, z)
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(3, math.nan)

    params = TParams(nu=float(nat[2]), mu=float(centre + spread * nat[0]), sigma=float(spread * nat[1]))
    return TFit(
        params,
        mu_se=float(spread * se[0]),
        sigma_se=float(spread * se[1]),
        nu_se=float(se[2]),
        neg_log_likelihood=t_negative_log_likelihood(params, x),
        iterations=int(nit),
    )


def _fit_histogram(z: np.ndarray, start: np.ndarray, log_nu_bounds):
    counts, edges = np.histogram(z, bins="fd")
    centres = 0.5 * (edges[:-1] + edges[1:])
    density = counts / (z.size * np.diff(edges))

    def residuals(theta):
        mu, log_sigma, log_nu = theta
        sigma = math.exp(log_sigma)
        nu = math.exp(log_nu)
        u = (centres - mu) / sigma
        log_norm = special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu) - 0.5 * math.log(math.pi * nu)
        model = np.exp(log_norm - 0.5 * (nu + 1) * np.log1p(u * u / nu)) / sigma
        return model - density

    res = optimize.least_squares(
        residuals,
        start,
        bounds=([-np.inf, -np.inf, log_nu_bounds[0]], [np.inf, np.inf, log_nu_bounds[1]]),
        xtol=1e-12,
        ftol=1e-12,
    )
    return res.x, res.success, res.nfev, res.message


def _to_params(theta, centre: float, spread: float) -> TParams | None:
    mu, log_sigma, log_nu = theta
    try:
        return TParams(math.exp(log_nu), centre + spread * mu, spread * math.exp(log_sigma))
    except (ValueError, OverflowError):
        return None


def critical_report(result: FitResult | tuple, q_levels: Sequence[float] = DEFAULT_Q_LEVELS) -> dict:
    """``|x_c(q)|`` under each fit, where ``P{r <= x_c} = q``.

    ``result`` is a :class:`FitResult` or a ``(NormalFit, TParams)`` pair.
    Returns ``{q: {"normal": ..., "t": ...}}``.
    """
    if isinstance(result, FitResult):
        normal, tparams = result.normal, result.student_t.params
    else:
        normal, tparams = result
    rows = {}
    for q in q_levels:
        if not 0.0 < q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {q}")
        rows[q] = {
            "normal": abs(normal.mu + normal.sigma * normal_quantile(q)),
            "t": abs(tparams.mu + tparams.sigma * t_quantile(q, tparams.nu)),
        }
    return rows


def fit(series: ReturnSeries, q_levels: Sequence[float] = DEFAULT_Q_LEVELS, method: str = "mle") -> FitResult:
    normal = fit_normal(series)
    student = fit_t(series, method=method)
    x = series.returns
    result = FitResult(
        normal,
        student,
        count=int(x.size),
        sample_mean=float(np.mean(x)),
        sample_std=float(np.std(x, ddof=1)),
        label=series.label,
    )
    return replace(result, critical_values=critical_report(result, q_levels))


def tail_mass_ratio(nu: float, threshold: float) -> float:
    """How much likelier ``xi > threshold`` is under ``t(nu)`` than under N(0, 1)."""
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    return t_sf(threshold, nu) / normal_sf(threshold)
