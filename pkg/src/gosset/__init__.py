"""Option pricing with fat-tailed (log Student's t) returns.

The asset at expiry is ``S_T = A_T * exp(sigma_T * xi)`` with ``xi ~ t(nu)``.
Because ``E{exp(sigma_T xi)}`` diverges for a t variate, the upper tail is
either capped or truncated at a critical value ``x_c(p)``. ``A_T`` follows from
the martingale condition and ``nu -> inf`` recovers Black-Scholes.
"""
from .calibration import (
    DegenerateSeriesError,
    FitConvergenceError,
    FitResult,
    NormalFit,
    ReturnSeries,
    TFit,
    critical_report,
    fit,
    fit_normal,
    fit_t,
    load_series,
    log_returns,
    tail_mass_ratio,
)
from .distributions import (
    LogTParams,
    TParams,
    lambda_nu,
    log_t_pdf,
    normal_cdf,
    normal_quantile,
    t_cdf,
    t_pdf,
    t_quantile,
    t_sf,
    t_variance,
)
from .martingale import (
    MartingaleScale,
    TailMode,
    TailPolicy,
    expected_asset_value,
    growth_integral,
    lognormal_scale,
    martingale_scale,
    resolve_policy,
)
from .numerics import (
    Interval,
    QuadratureError,
    QuadratureResult,
    integrate,
    ln_gamma,
    ln_gamma_half_ratio,
    regularized_incomplete_beta,
)
from .oracle import McConfig, McEstimate, mc_call_put, mc_expected_asset, mc_price
from .pricing import (
    MarketParams,
    Model,
    OptionKind,
    Quote,
    StrikeAboveTruncationError,
    black_scholes,
    gosset_call,
    gosset_price,
    gosset_put,
    parity_gap,
)

__version__ = "0.1.0"
