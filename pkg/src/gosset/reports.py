"""Critical-value tables and the price sweeps behind the comparison figures.

Each function returns ``(header, rows)`` ready for :func:`write_csv`.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

from .distributions import normal_quantile, t_quantile
from .martingale import TailMode, TailPolicy
from .pricing import MarketParams, OptionKind, black_scholes, gosset_call, gosset_price

__all__ = [
    "REFERENCE_MARKET",
    "TABLE2_P",
    "TABLE3_P",
    "TABLE3_NU",
    "FIGURE_DEFAULTS",
    "critical_value",
    "table_ii",
    "table_iii",
    "sweep",
    "write_csv",
]

# r = 3%, S0 = 50, K_T = 49, sigma_T = 0.3, T = 1 year
REFERENCE_MARKET = MarketParams.from_sigma_t(50.0, 49.0, 0.03, 0.3, 1.0)

TABLE2_P = (0.9, 0.95, 0.99, 0.995, 0.999, 0.9999)
TABLE3_P = (0.90, 0.95, 0.99, 0.999, 0.9999)
TABLE3_NU = (3.0, 4.0, 6.0, 40.0, math.inf)

_NU_GRID = (2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)
_P_GRID = (0.99, 0.9925, 0.995, 0.9975, 0.999, 0.9995, 0.9999, 0.99995, 0.99999)
_S0_GRID = tuple(25.0 + 2.5 * i for i in range(21))

FIGURE_DEFAULTS = {
    4: {"mode": TailMode.CAPPED, "x": "nu", "grid": _NU_GRID, "series": (0.99, 0.999, 0.9999)},
    5: {"mode": TailMode.TRUNCATED, "x": "nu", "grid": _NU_GRID, "series": (0.99, 0.999, 0.9999)},
    6: {"mode": TailMode.CAPPED, "x": "p", "grid": _P_GRID, "series": (3.0, 5.0, 40.0)},
    7: {"mode": TailMode.TRUNCATED, "x": "p", "grid": _P_GRID, "series": (3.0, 5.0, 40.0)},
    8: {"mode": TailMode.CAPPED, "x": "s0", "grid": _S0_GRID, "series": (3.0, 5.0), "p": 0.999},
    9: {"mode": TailMode.TRUNCATED, "x": "s0", "grid": _S0_GRID, "series": (3.0, 5.0), "p": 0.999},
}


def critical_value(p: float, nu: float) -> float:
    """``x_c(p)``; ``nu = inf`` gives the normal quantile."""
    return normal_quantile(p) if math.isinf(nu) else t_quantile(p, nu)


def table_ii(sigma_t: float = 0.4, nu: float = 5.0, p_levels: Sequence[float] = TABLE2_P):
    header = ["p", "t_x_c", "t_growth", "normal_x_c", "normal_growth"]
    rows = []
    for p in p_levels:
        xt = critical_value(p, nu)
        xn = normal_quantile(p)
        rows.append([p, xt, math.exp(sigma_t * xt), xn, math.exp(sigma_t * xn)])
    return header, rows


def table_iii(nu_levels: Sequence[float] = TABLE3_NU, p_levels: Sequence[float] = TABLE3_P):
    header = ["nu"] + [f"p={p:g}" for p in p_levels]
    rows = [[nu] + [critical_value(p, nu) for p in p_levels] for nu in nu_levels]
    return header, rows


def _difference_row(task):
    x_name, x, series, mode, market = task
    bs = black_scholes(market).price_now
    row = [x, bs]
    for s in series:
        nu, p = (x, s) if x_name == "nu" else (s, x)
        price = gosset_call(market, nu, TailPolicy(mode, p=p)).price_now
        row += [price, price - bs]
    return row


def _s0_row(task):
    _, s0, series, mode, market, p = task
    m = market.with_(s0=s0)
    row = [s0, black_scholes(m, OptionKind.CALL).price_now, black_scholes(m, OptionKind.PUT).price_now]
    for nu in series:
        policy = TailPolicy(mode, p=p)
        row += [
            gosset_price(m, nu, policy, OptionKind.CALL).price_now,
            gosset_price(m, nu, policy, OptionKind.PUT).price_now,
        ]
    return row


def _map(fn: Callable, tasks: list, workers: int) -> Iterable:
    if workers <= 1:
        return map(fn, tasks)
    with ProcessPoolExecutor(workers) as pool:
        # map keeps the input order whatever the completion order
        return list(pool.map(fn, tasks))


def sweep(
    figure: int,
    market: MarketParams = REFERENCE_MARKET,
    grid: Sequence[float] | None = None,
    series: Sequence[float] | None = None,
    p: float | None = None,
    workers: int = 1,
):
    """Data for one comparison figure.

    Figures 4-5 sweep ``nu`` for several ``p``; 6-7 sweep ``p`` for several
    ``nu`` (columns hold the Gosset call and its excess over Black-Scholes).
    Figures 8-9 sweep the spot price and give call and put under each ``nu``
    next to Black-Scholes. Figures 4, 6 and 8 cap the tail; 5, 7 and 9
    truncate it.
    """
    if figure not in FIGURE_DEFAULTS:
        raise ValueError(f"unknown figure {figure}; choose from {sorted(FIGURE_DEFAULTS)}")
    spec = FIGURE_DEFAULTS[figure]
    grid = tuple(grid) if grid is not None else spec["grid"]
    series = tuple(series) if series is not None else spec["series"]
    mode = spec["mode"]

    if spec["x"] == "s0":
        p = spec["p"] if p is None else p
        header = ["s0", "bs_call", "bs_put"]
        for nu in series:
            header += [f"call_nu={nu:g}", f"put_nu={nu:g}"]
        tasks = [("s0", x, series, mode, market, p) for x in grid]
        rows = list(_map(_s0_row, tasks, workers))
    else:
        label = "p" if spec["x"] == "nu" else "nu"
        header = [spec["x"], "bs_call"]
        for s in series:
            header += [f"gosset_{label}={s:g}", f"diff_{label}={s:g}"]
        tasks = [(spec["x"], x, series, mode, market) for x in grid]
        rows = list(_map(_difference_row, tasks, workers))
    return header, rows


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(round(value, 10)) if abs(value) >= 1e-4 or value == 0 else f"{value:.10g}"
    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Sequence], fh=None) -> str:
    """Write rows as UTF-8 CSV with a header; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(float(v)) if isinstance(v, (int, float)) else v for v in row])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
