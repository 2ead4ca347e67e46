# %% [markdown]
# # Fixing `A_T` without a risk premium
#
# `S_T = A_T exp(sigma_T xi)` with `xi ~ t(nu)`. For any finite `nu` the mean
# of `exp(sigma_T xi)` is infinite, so the upper tail is bounded at the
# critical value `x_c(p)` and `A_T` is set so that `E[S_T] = S_0 e^{rT}`.

# %%
import math

from gosset import (
    Interval,
    MarketParams,
    TailPolicy,
    expected_asset_value,
    growth_integral,
    lognormal_scale,
    martingale_scale,
    resolve_policy,
)

market = MarketParams.from_sigma_t(s0=50.0, strike=49.0, rate=0.03, sigma_t=0.3, tenor=1.0)

# %% [markdown]
# The growth integral keeps rising with the upper limit; it never settles.

# %%
for upper in (5, 20, 50, 100, 200):
    print(upper, growth_integral(0.3, 3.0, Interval(-math.inf, upper)))

# %% [markdown]
# Capping versus truncating at `p = 0.9999`, `nu = 3`.

# %%
for policy in (TailPolicy.capped(p=0.9999), TailPolicy.truncated(p=0.9999)):
    scale = martingale_scale(market, 3.0, policy)
    limit = math.log(market.strike / scale.a_t) / market.sigma_t
    print(
        f"{policy.mode.value:9s}  x_c={scale.x_c:.4f}  Z={scale.z:.4f}  denominator={scale.denominator:.4f}"
        f"  A_T={scale.a_t:.4f}  ln(K/A_T)/sigma_T={limit:.4f}"
    )

# %% [markdown]
# Re-evaluating the expectation through the asset density recovers the forward.

# %%
policy = resolve_policy(TailPolicy.capped(p=0.999), 5.0)
scale = martingale_scale(market, 5.0, policy)
print(expected_asset_value(scale, market, 5.0, policy), market.s0 * math.exp(market.rate))

# %% [markdown]
# The lognormal limit: `Z = exp(sigma_T^2 / 2)`.

# %%
print(lognormal_scale(market).z, growth_integral(0.3, math.inf, Interval(-math.inf, math.inf)))
