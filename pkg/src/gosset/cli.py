"""``gosset`` command line: pricing, tables, figure sweeps, fitting and checks.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import reports
from .calibration import DEFAULT_Q_LEVELS, DegenerateSeriesError, FitConvergenceError, fit, load_series
from .martingale import TailMode, TailPolicy
from .numerics import QuadratureError
from .oracle import McConfig, mc_price
from .pricing import (
    MarketParams,
    OptionKind,
    StrikeAboveTruncationError,
    black_scholes,
    gosset_price,
    parity_gap,
)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
PARITY_TOLERANCE = 1e-6
MC_Z_LIMIT = 3.0

PRICE_KEYS = "c0_or_p0, price_at_expiry, a_t, z, denominator, x_c, p, lower_limit, model, kind, nu"
PARITY_KEYS = "model, nu, p, x_c, c0, p0, s0_minus_k0, gap, tolerance, pass"
MC_KEYS = "model, kind, nu, p, x_c, quadrature, mc_estimate, std_error, z_score, samples, seed, pass"
FIT_KEYS = "label, normal{mu, mu_se, sigma, sigma_se}, t{mu, mu_se, sigma, sigma_se, nu, nu_se}, critical_values[{q, normal, t}], count, sample_mean, sample_std"


class UsageError(Exception):
    pass


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return value


def _number_list(text: str) -> list[float]:
    return [_number(part) for part in text.split(",") if part.strip()]


def _add_market(parser: argparse.ArgumentParser) -> None:
    m = parser.add_argument_group("market (defaults: S0=50, K_T=49, r=0.03, sigma_T=0.3, T=1)")
    m.add_argument("--s0", type=_number, default=50.0, help="spot price")
    m.add_argument("--strike", type=_number, default=49.0, help="strike at expiry K_T")
    m.add_argument("--rate", type=_number, default=0.03, help="continuously compounded risk-free rate")
    vol = m.add_mutually_exclusive_group()
    vol.add_argument("--sigma", type=_number, help="annualised volatility")
    vol.add_argument("--sigma-t", type=_number, help="horizon volatility sigma*sqrt(T) (default 0.3)")
    m.add_argument("--tenor", type=_number, default=1.0, help="time to expiry in years")


def _add_model(parser: argparse.ArgumentParser, modes: Sequence[str], with_kind: bool = True) -> None:
    g = parser.add_argument_group("model")
    g.add_argument("--mode", choices=modes, default=modes[0])
    g.add_argument("--nu", type=_number, help="t shape parameter (Gosset modes)")
    if with_kind:
        g.add_argument("--kind", choices=[k.value for k in OptionKind], default="call")
    tail = g.add_mutually_exclusive_group()
    tail.add_argument("--p", type=_number, help="confidence level of the cap or truncation")
    tail.add_argument("--xc", type=_number, help="critical value x_c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gosset",
        description="European option prices under log Student's t returns, with Black-Scholes for reference.",
        epilog="Exit codes: 0 success, 2 usage error, 3 numerical failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    raw = argparse.RawDescriptionHelpFormatter

    price = sub.add_parser(
        "price", help="price one option (JSON)", formatter_class=raw,
        epilog=f"JSON keys: {PRICE_KEYS}\nCurrency values are rounded to 6 decimals; x_c and p are null for black-scholes.",
    )
    _add_market(price)
    _add_model(price, ["capped", "truncated", "black-scholes"])

    tables = sub.add_parser("tables", help="critical-value tables (CSV)", formatter_class=raw,
                            epilog="Table 2 columns: p, t_x_c, t_growth, normal_x_c, normal_growth\n"
                                   "Table 3: one row per nu, one column per p")
    tables.add_argument("--which", type=int, choices=[2, 3], required=True)
    tables.add_argument("--sigma-t", type=_number, default=0.4, help="horizon volatility for table 2")
    tables.add_argument("--nu", type=_number, default=5.0, help="t shape for table 2")
    tables.add_argument("--nu-list", type=_number_list, help="comma-separated nu values for table 3 (inf allowed)")
    tables.add_argument("--p-list", type=_number_list, help="comma-separated confidence levels")

    sweep = sub.add_parser(
        "sweep", help="data behind one comparison figure (CSV)", formatter_class=raw,
        epilog="Figures 4/5: nu on rows, one column pair per p (capped/truncated).\n"
               "Figures 6/7: p on rows, one column pair per nu.\n"
               "Figures 8/9: S0 on rows, call and put per nu beside Black-Scholes.",
    )
    sweep.add_argument("--figure", type=int, choices=sorted(reports.FIGURE_DEFAULTS), required=True)
    _add_market(sweep)
    sweep.add_argument("--nu-list", type=_number_list, help="nu grid (figs 4-5) or nu series (figs 6-9)")
    sweep.add_argument("--p-list", type=_number_list, help="p series (figs 4-5) or p grid (figs 6-7)")
    sweep.add_argument("--s0-list", type=_number_list, help="spot grid (figs 8-9)")
    sweep.add_argument("--p", type=_number, help="confidence level for figs 8-9 (default 0.999)")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    fitp = sub.add_parser("fit", help="fit normal and t to a return series (JSON)", formatter_class=raw,
                          epilog=f"Input CSV: a 'return' column, or 'date,close' prices.\nJSON keys: {FIT_KEYS}")
    fitp.add_argument("--input", required=True, help="CSV path")
    fitp.add_argument("--q-levels", type=_number_list, default=list(DEFAULT_Q_LEVELS))
    fitp.add_argument("--method", choices=["mle", "histogram"], default="mle")

    parity = sub.add_parser("parity", help="put-call parity check (JSON)", formatter_class=raw,
                            epilog=f"JSON keys: {PARITY_KEYS}\nExit 3 when |gap| >= {PARITY_TOLERANCE:g}.")
    _add_market(parity)
    _add_model(parity, ["capped", "truncated", "black-scholes"], with_kind=False)

    mc = sub.add_parser("mc-check", help="Monte Carlo cross-check of a quadrature price (JSON)",
                        formatter_class=raw,
                        epilog=f"JSON keys: {MC_KEYS}\nExit 3 when |z| > {MC_Z_LIMIT:g}.")
    _add_market(mc)
    _add_model(mc, ["capped", "truncated"])
    mc.add_argument("--samples", type=int, default=1_000_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--workers", type=int, default=1)
    return parser


def _market(args) -> MarketParams:
    for flag in ("s0", "strike", "tenor"):
        value = getattr(args, flag)
        if not (value > 0 and math.isfinite(value)):
            raise UsageError(f"--{flag} must be finite and > 0")
    if not math.isfinite(args.rate):
        raise UsageError("--rate must be finite")
    if args.sigma is not None:
        if not (args.sigma > 0 and math.isfinite(args.sigma)):
            raise UsageError("--sigma must be finite and > 0")
        return MarketParams(args.s0, args.strike, args.rate, args.sigma, args.tenor)
    sigma_t = 0.3 if args.sigma_t is None else args.sigma_t
    if not (sigma_t > 0 and math.isfinite(sigma_t)):
        raise UsageError("--sigma-t must be finite and > 0")
    return MarketParams.from_sigma_t(args.s0, args.strike, args.rate, sigma_t, args.tenor)


def _policy(args) -> TailPolicy | None:
    if args.mode == "black-scholes":
        return None
    if args.nu is None:
        raise UsageError(f"--nu is required for --mode {args.mode}")
    if not (args.nu > 0 and math.isfinite(args.nu)):
        raise UsageError("--nu must be finite and > 0")
    if args.p is None and args.xc is None:
        raise UsageError(f"one of --p or --xc is required for --mode {args.mode}")
    if args.p is not None and not 0.0 < args.p < 1.0:
        raise UsageError("--p must lie in (0, 1)")
    if args.xc is not None and not math.isfinite(args.xc):
        raise UsageError("--xc must be finite")
    return TailPolicy(TailMode(args.mode), p=args.p, x_c=args.xc)


def _finite_or_none(value):
    if value is None or not math.isfinite(value):
        return None
    return value


def _cash(value: float) -> float:
    return round(value, 6)


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _quote(market: MarketParams, args, policy, kind):
    if policy is None:
        return black_scholes(market, kind)
    return gosset_price(market, args.nu, policy, kind)


def _cmd_price(args) -> int:
    market, policy = _market(args), _policy(args)
    q = _quote(market, args, policy, args.kind)
    _emit_json({
        "c0_or_p0": _cash(q.price_now),
        "price_at_expiry": _cash(q.price_at_expiry),
        "a_t": _cash(q.scale.a_t),
        "z": q.scale.z,
        "denominator": q.scale.denominator,
        "x_c": _finite_or_none(q.scale.x_c) if policy else None,
        "p": q.scale.p if policy else None,
        "lower_limit": q.lower_limit,
        "model": q.model.value,
        "kind": q.kind.value,
        "nu": q.nu,
    })
    return 0


def _cmd_parity(args) -> int:
    market, policy = _market(args), _policy(args)
    call = _quote(market, args, policy, OptionKind.CALL)
    put = _quote(market, args, policy, OptionKind.PUT)
    gap = parity_gap(call, put, market)
    ok = abs(gap) < PARITY_TOLERANCE
    _emit_json({
        "model": call.model.value,
        "nu": call.nu,
        "p": call.scale.p if policy else None,
        "x_c": _finite_or_none(call.scale.x_c) if policy else None,
        "c0": call.price_now,
        "p0": put.price_now,
        "s0_minus_k0": market.s0 - market.strike_now,
        "gap": gap,
        "tolerance": PARITY_TOLERANCE,
        "pass": ok,
    })
    return 0 if ok else EXIT_NUMERICAL


def _cmd_mc(args) -> int:
    market, policy = _market(args), _policy(args)
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    quote = gosset_price(market, args.nu, policy, args.kind)
    est = mc_price(market, args.nu, policy, args.kind, McConfig(args.samples, args.seed, workers=args.workers))
    z = est.z_score(quote.price_now)
    ok = abs(z) <= MC_Z_LIMIT
    _emit_json({
        "model": quote.model.value,
        "kind": quote.kind.value,
        "nu": args.nu,
        "p": quote.scale.p,
        "x_c": quote.scale.x_c,
        "quadrature": quote.price_now,
        "mc_estimate": est.mean,
        "std_error": est.std_error,
        "z_score": _finite_or_none(z),
        "samples": est.samples,
        "seed": args.seed,
        "pass": ok,
    })
    return 0 if ok else EXIT_NUMERICAL


def _check_levels(values, flag: str) -> None:
    for v in values or ():
        if not 0.0 < v < 1.0:
            raise UsageError(f"{flag} values must lie in (0, 1), got {v}")


def _check_nus(values, flag: str, allow_inf: bool = False) -> None:
    for v in values or ():
        if not (v > 0 and (allow_inf or math.isfinite(v))):
            raise UsageError(f"{flag} values must be > 0, got {v}")


def _cmd_tables(args) -> int:
    _check_levels(args.p_list, "--p-list")
    _check_nus(args.nu_list, "--nu-list", allow_inf=True)
    if not (args.sigma_t > 0 and math.isfinite(args.sigma_t)):
        raise UsageError("--sigma-t must be finite and > 0")
    if not (args.nu > 0):
        raise UsageError("--nu must be > 0")
    if args.which == 2:
        header, rows = reports.table_ii(args.sigma_t, args.nu, args.p_list or reports.TABLE2_P)
    else:
        header, rows = reports.table_iii(args.nu_list or reports.TABLE3_NU, args.p_list or reports.TABLE3_P)
    reports.write_csv(header, rows, sys.stdout)
    return 0


def _cmd_sweep(args) -> int:
    market = _market(args)
    axis = reports.FIGURE_DEFAULTS[args.figure]["x"]
    _check_levels(args.p_list, "--p-list")
    _check_nus(args.nu_list, "--nu-list")
    if args.p is not None and not 0.0 < args.p < 1.0:
        raise UsageError("--p must lie in (0, 1)")
    if args.s0_list and any(not (s > 0 and math.isfinite(s)) for s in args.s0_list):
        raise UsageError("--s0-list values must be finite and > 0")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if axis == "nu":
        grid, series = args.nu_list, args.p_list
    elif axis == "p":
        grid, series = args.p_list, args.nu_list
    else:
        grid, series = args.s0_list, args.nu_list
    header, rows = reports.sweep(args.figure, market, grid, series, args.p, args.workers)
    reports.write_csv(header, rows, sys.stdout)
    return 0


def _cmd_fit(args) -> int:
    _check_levels(args.q_levels, "--q-levels")
    try:
        series = load_series(args.input)
    except OSError as exc:
        raise UsageError(f"--input: cannot read {args.input}: {exc.strerror or exc}") from None
    except ValueError as exc:
        if isinstance(exc, DegenerateSeriesError):
            raise
        raise UsageError(f"--input: {exc}") from None
    result = fit(series, args.q_levels)
    _emit_json(result.to_dict())
    return 0


_COMMANDS = {
    "price": _cmd_price,
    "tables": _cmd_tables,
    "sweep": _cmd_sweep,
    "fit": _cmd_fit,
    "parity": _cmd_parity,
    "mc-check": _cmd_mc,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DegenerateSeriesError, StrikeAboveTruncationError) as exc:
        print(f"gosset {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, FitConvergenceError, ArithmeticError) as exc:
        print(f"gosset {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"gosset {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
