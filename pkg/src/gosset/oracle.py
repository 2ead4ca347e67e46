"""Monte Carlo cross-check for the quadrature prices.

Draws ``xi`` by inverting the t CDF, applies the cap (clamp at ``x_c``) or the
truncation (condition on ``xi <= x_c``), and averages discounted payoffs.
Sampling is split over ``workers`` independent sub-streams spawned from the
seed, so a fixed seed and worker count reproduce the estimate bit for bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import t_quantile
from .martingale import TailMode, TailPolicy, martingale_scale, resolve_policy
from .pricing import MarketParams, OptionKind

__all__ = ["McConfig", "McEstimate", "sample_xi", "mc_price", "mc_call_put", "mc_expected_asset"]

# Half a unit in the last place of numpy's 53-bit uniforms: keeps u in (0, 1).
_HALF_ULP = 2.0**-54


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    batch: int = 250_000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == reference else math.copysign(math.inf, self.mean - reference)
        return (self.mean - reference) / self.std_error


def _worker_sizes(config: McConfig) -> list[int]:
    base, extra = divmod(config.samples, config.workers)
    return [base + (1 if i < extra else 0) for i in range(config.workers)]


def _draw(rng: np.random.Generator, n: int, nu: float, policy: TailPolicy) -> np.ndarray:
    u = rng.random(n) + _HALF_ULP
    if policy.mode is TailMode.TRUNCATED:
        return t_quantile(u * policy.p, nu)
    return np.minimum(t_quantile(u, nu), policy.x_c)


def _stream(seed_seq: np.random.SeedSequence, n: int, batch: int, nu: float, policy: TailPolicy):
    rng = np.random.default_rng(seed_seq)
    done = 0
    while done < n:
        size = min(batch, n - done)
        yield _draw(rng, size, nu, policy)
        done += size


def sample_xi(nu: float, policy: TailPolicy, config: McConfig) -> Iterator[np.ndarray]:
    """Yield batches of capped or truncated t variates.

    Batches of worker 0 come first, then worker 1 and so on, matching the
    order in which :func:`mc_price` merges them.
    """
    policy = resolve_policy(policy, nu)
    seeds = np.random.SeedSequence(config.seed).spawn(config.workers)
    for seq, n in zip(seeds, _worker_sizes(config)):
        yield from _stream(seq, n, config.batch, nu, policy)


def _moments(values: np.ndarray) -> tuple[int, float, float]:
    n = values.size
    mean = math.fsum(values) / n
    dev = values - mean
    return n, mean, math.fsum(dev * dev)


def _merge(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    """Combine (count, mean, sum of squared deviations) of two samples."""
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _run(config: McConfig, nu: float, policy: TailPolicy, payoffs) -> list[McEstimate]:
    """Estimate the mean of each payoff function over one shared set of draws."""
    seeds = np.random.SeedSequence(config.seed).spawn(config.workers)
    sizes = _worker_sizes(config)
    empty = (0, 0.0, 0.0)

    def work(i: int):
        accs = [empty] * len(payoffs)
        for xi in _stream(seeds[i], sizes[i], config.batch, nu, policy):
            accs = [_merge(acc, _moments(fn(xi))) for acc, fn in zip(accs, payoffs)]
        return accs

    if config.workers == 1:
        parts = [work(0)]
    else:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(work, range(config.workers)))
    estimates = []
    for j in range(len(payoffs)):
        total = empty
        for part in parts:
            total = _merge(total, part[j])
        n, mean, m2 = total
        var = m2 / (n - 1) if n > 1 else 0.0
        estimates.append(McEstimate(mean, math.sqrt(var / n), n))
    return estimates


def _payoffs(market: MarketParams, nu: float, policy: TailPolicy):
    scale = martingale_scale(market, nu, policy)
    df = market.discount_factor
    a_t, sigma_t, strike = scale.a_t, market.sigma_t, market.strike

    def call(xi):
        return df * np.maximum(a_t * np.exp(sigma_t * xi) - strike, 0.0)

    def put(xi):
        return df * np.maximum(strike - a_t * np.exp(sigma_t * xi), 0.0)

    return {OptionKind.CALL: call, OptionKind.PUT: put}


def mc_price(
    market: MarketParams,
    nu: float,
    policy: TailPolicy,
    kind: OptionKind | str = OptionKind.CALL,
    config: McConfig = McConfig(),
) -> McEstimate:
    """Discounted mean payoff with its standard error, using ``A_T`` from the martingale module."""
    policy = resolve_policy(policy, nu)
    payoff = _payoffs(market, nu, policy)[OptionKind(kind)]
    return _run(config, nu, policy, [payoff])[0]


def mc_call_put(
    market: MarketParams, nu: float, policy: TailPolicy, config: McConfig = McConfig()
) -> dict[OptionKind, McEstimate]:
    """Call and put estimates from the same draws (same as two :func:`mc_price` calls)."""
    policy = resolve_policy(policy, nu)
    payoffs = _payoffs(market, nu, policy)
    call, put = _run(config, nu, policy, [payoffs[OptionKind.CALL], payoffs[OptionKind.PUT]])
    return {OptionKind.CALL: call, OptionKind.PUT: put}


def mc_expected_asset(market: MarketParams, nu: float, policy: TailPolicy, config: McConfig = McConfig()) -> McEstimate:
    """Sample mean of ``S_T = A_T exp(sigma_T xi)``; should match ``S_0 e^{rT}``."""
    policy = resolve_policy(policy, nu)
    scale = martingale_scale(market, nu, policy)
    return _run(config, nu, policy, [lambda xi: scale.a_t * np.exp(market.sigma_t * xi)])[0]
