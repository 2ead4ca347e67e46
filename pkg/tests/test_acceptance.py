"""Acceptance criteria, one test each.

Every test records a one-line verdict that is printed in the
"acceptance criteria" section at the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from gosset.calibration import ReturnSeries, fit_t
from gosset.distributions import normal_quantile, t_quantile
from gosset.martingale import TailMode, TailPolicy, expected_asset_value, growth_integral, martingale_scale, resolve_policy
from gosset.numerics import Interval
from gosset.oracle import McConfig, mc_call_put
from gosset.pricing import MarketParams, OptionKind, black_scholes, gosset_call, gosset_price, gosset_put, parity_gap
from gosset.reports import sweep

MARKET = MarketParams.from_sigma_t(50.0, 49.0, 0.03, 0.3, 1.0)
GRID_NU = (2.65, 3.0, 5.0, 40.0)
GRID_P = (0.99, 0.999, 0.9999)
GRID_S0 = (25.0, 40.0, 50.0, 60.0, 75.0)
MC_SEED = 12345
MC_SAMPLES = 1_000_000


def within_last_digit(value: float, printed: str) -> bool:
    """``value`` rounded to the printed digits is at most one unit away."""
    digits = len(printed.split(".")[1])
    unit = 10.0**-digits
    return abs(round(value, digits) - float(printed)) <= unit * (1 + 1e-9)


def test_criterion_01_black_scholes_reference(record_criterion):
    price = black_scholes(MARKET).price_now
    ok = abs(price - 7.12) <= 0.005
    record_criterion(1, ok, f"Black-Scholes C0 = {price:.6f} (target 7.12 +/- 0.005)")
    assert ok


TABLE_II = {
    0.9: ("1.476", "1.805", "1.282", "1.670"),
    0.95: ("2.015", "2.239", "1.645", "1.931"),
    0.99: ("3.365", "3.842", "2.326", "2.536"),
    0.995: ("4.032", "5.018", "2.576", "2.801"),
    0.999: ("5.893", "10.56", "3.090", "3.442"),
    0.9999: ("9.678", "47.99", "3.719", "4.428"),
}


def test_criterion_02_table_ii(record_criterion):
    start = time.perf_counter()
    misses = []
    for p, printed in TABLE_II.items():
        xt = t_quantile(p, 5.0)
        xn = normal_quantile(p)
        computed = (xt, math.exp(0.4 * xt), xn, math.exp(0.4 * xn))
        names = ("t x_c", "t exp", "normal x_c", "normal exp")
        for name, value, text in zip(names, computed, printed):
            if not within_last_digit(value, text):
                misses.append(f"{name} at p={p}: computed {value:.6f}, printed {text}")
    elapsed = time.perf_counter() - start
    ok = not misses and elapsed < 1.0
    detail = f"{24 - len(misses)}/24 cells within one printed digit, {elapsed:.3f} s"
    if misses:
        detail += "; off: " + "; ".join(misses)
    record_criterion(2, ok, detail)
    assert not misses, misses
    assert elapsed < 1.0


TABLE_III = {
    3.0: ("1.638", "2.353", "4.541", "10.21", "22.20"),
    4.0: ("1.533", "2.132", "3.747", "7.173", "13.03"),
    6.0: ("1.440", "1.943", "3.143", "5.208", "8.025"),
    40.0: ("1.303", "1.684", "2.423", "3.307", "4.094"),
    math.inf: ("1.282", "1.645", "2.326", "3.090", "3.719"),
}


def test_criterion_03_table_iii(record_criterion):
    start = time.perf_counter()
    misses = []
    for nu, row in TABLE_III.items():
        for p, text in zip((0.90, 0.95, 0.99, 0.999, 0.9999), row):
            value = normal_quantile(p) if math.isinf(nu) else t_quantile(p, nu)
            if not within_last_digit(value, text):
                misses.append(f"nu={nu} p={p}: computed {value:.6f}, printed {text}")
    elapsed = time.perf_counter() - start
    ok = not misses and elapsed < 1.0
    record_criterion(3, ok, f"{25 - len(misses)}/25 critical values within one printed digit, {elapsed:.3f} s" + (f"; off: {misses}" if misses else ""))
    assert not misses, misses
    assert elapsed < 1.0


def test_criterion_04_reference_diagnostics(record_criterion):
    start = time.perf_counter()
    capped = gosset_call(MARKET, 3.0, TailPolicy.capped(p=0.9999))
    truncated = gosset_call(MARKET, 3.0, TailPolicy.truncated(p=0.9999))
    diff = capped.price_now - truncated.price_now
    checks = {
        "capped denominator": (capped.scale.denominator, abs(capped.scale.denominator - 1.281) <= 0.002),
        "capped lower limit": (capped.lower_limit, abs(capped.lower_limit - 0.6583) <= 0.001),
        "truncated Z": (truncated.scale.z, abs(truncated.scale.z - 1.203) <= 0.002),
        "truncated lower limit": (truncated.lower_limit, abs(truncated.lower_limit - 0.4488) <= 0.001),
        "capped minus truncated": (diff, 1.40 <= diff <= 1.60),
        "cap-tail term": (capped.cap_term, abs(capped.cap_term - 3.14) <= 0.05),
    }
    elapsed = time.perf_counter() - start
    ok = all(passed for _, passed in checks.values()) and elapsed < 1.0
    detail = ", ".join(f"{k} {v:.4f}" for k, (v, _) in checks.items()) + f", {elapsed:.3f} s"
    record_criterion(4, ok, detail)
    assert all(passed for _, passed in checks.values()), checks
    assert elapsed < 1.0


def test_criterion_05_figure_anchors(record_criterion):
    start = time.perf_counter()
    h4, rows4 = sweep(4)
    h8, rows8 = sweep(8, series=[40.0])
    elapsed = time.perf_counter() - start

    nu40 = next(r for r in rows4 if r[0] == 40.0)
    premiums = {p: nu40[h4.index(f"diff_p={p:g}")] for p in GRID_P}
    fig4_ok = all(0.05 <= d <= 0.12 for d in premiums.values())

    gaps = []
    for row in rows8:
        gaps.append(abs(row[h8.index("call_nu=40")] - row[h8.index("bs_call")]))
        gaps.append(abs(row[h8.index("put_nu=40")] - row[h8.index("bs_put")]))
    worst = max(gaps)
    worst_s0 = rows8[int(np.argmax(gaps)) // 2][0]
    fig8_ok = worst < 0.10

    ok = fig4_ok and fig8_ok and elapsed < 10.0
    detail = (
        f"nu=40 capped premium over BS "
        + ", ".join(f"p={p}: {d:.4f}" for p, d in premiums.items())
        + f" ({'in' if fig4_ok else 'outside'} [0.05, 0.12]); "
        f"spot sweep max |Gosset - BS| = {worst:.4f} at S0={worst_s0:g} "
        f"({'<' if fig8_ok else 'not <'} 0.10); sweeps {elapsed:.2f} s"
    )
    record_criterion(5, ok, detail)
    assert fig4_ok, premiums
    assert elapsed < 10.0
    assert fig8_ok, f"max |Gosset - BS| over the spot sweep is {worst:.4f} at S0={worst_s0}"


def test_criterion_06_put_call_parity(record_criterion):
    start = time.perf_counter()
    worst = 0.0
    for mode in TailMode:
        for nu in GRID_NU:
            for p in GRID_P:
                policy = resolve_policy(TailPolicy(mode, p=p), nu)
                for s0 in GRID_S0:
                    m = MARKET.with_(s0=s0)
                    gap = parity_gap(gosset_call(m, nu, policy), gosset_put(m, nu, policy), m)
                    worst = max(worst, abs(gap))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 30.0
    record_criterion(6, ok, f"max |parity gap| = {worst:.2e} over 120 points (tol 1e-6), {elapsed:.2f} s")
    assert worst < 1e-6
    assert elapsed < 30.0


def test_criterion_07_martingale(record_criterion):
    worst = 0.0
    for mode in TailMode:
        for nu in GRID_NU:
            for p in GRID_P:
                policy = resolve_policy(TailPolicy(mode, p=p), nu)
                for s0 in GRID_S0:
                    m = MARKET.with_(s0=s0)
                    scale = martingale_scale(m, nu, policy)
                    forward = s0 * math.exp(m.rate * m.tenor)
                    rel = abs(expected_asset_value(scale, m, nu, policy) / forward - 1.0)
                    worst = max(worst, rel)
    ok = worst < 1e-8
    record_criterion(7, ok, f"max relative error of E[S_T] vs S0 e^(rT) = {worst:.2e} (tol 1e-8)")
    assert ok


def test_criterion_08_lognormal_limit(record_criterion):
    z = growth_integral(MARKET.sigma_t, math.inf, Interval(-math.inf, math.inf))
    z_err = abs(z - math.exp(0.5 * MARKET.sigma_t**2))
    price = gosset_call(MARKET, 500.0, TailPolicy.capped(p=0.999999)).price_now
    gap = abs(price - black_scholes(MARKET).price_now)
    ok = z_err <= 1e-10 and gap < 0.05
    record_criterion(8, ok, f"normal-pathway Z error {z_err:.1e} (tol 1e-10); nu=500 p=0.999999 price gap {gap:.4f} (tol 0.05)")
    assert z_err <= 1e-10
    assert gap < 0.05


def test_criterion_09_monte_carlo_oracle(record_criterion):
    start = time.perf_counter()
    config = McConfig(samples=MC_SAMPLES, seed=MC_SEED)
    z_scores = {}
    for mode in TailMode:
        for nu in (3.0, 5.0, 40.0):
            policy = resolve_policy(TailPolicy(mode, p=0.999), nu)
            estimates = mc_call_put(MARKET, nu, policy, config)
            for kind in OptionKind:
                reference = gosset_price(MARKET, nu, policy, kind).price_now
                z_scores[(mode.value, nu, kind.value)] = estimates[kind].z_score(reference)
    elapsed = time.perf_counter() - start
    worst_key = max(z_scores, key=lambda k: abs(z_scores[k]))
    passes = sum(abs(z) <= 3 for z in z_scores.values())
    ok = passes == 12 and elapsed < 120.0
    record_criterion(
        9, ok,
        f"{passes}/12 configs with |z| <= 3 (N={MC_SAMPLES}, seed {MC_SEED}, p=0.999); "
        f"max |z| = {abs(z_scores[worst_key]):.2f} at {worst_key}; {elapsed:.1f} s",
    )
    assert passes == 12, z_scores
    assert elapsed < 120.0


def test_criterion_10_calibration_recovery(record_criterion):
    nu0, mu0, sigma0 = 3.0, 4e-4, 0.0116
    passes = 0
    nus = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        series = ReturnSeries(stats.t.rvs(nu0, loc=mu0, scale=sigma0, size=20_000, random_state=rng))
        f = fit_t(series)
        nus.append(f.nu)
        if abs(f.nu - nu0) <= 0.15 * nu0 and abs(f.mu - mu0) <= 3 * f.mu_se and abs(f.sigma - sigma0) <= 3 * f.sigma_se:
            passes += 1
    ok = passes >= 9
    record_criterion(10, ok, f"{passes}/10 seeds recover (nu within 15%, mu and sigma within 3 SE); nu range {min(nus):.3f}-{max(nus):.3f}")
    assert ok
