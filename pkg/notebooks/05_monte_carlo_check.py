# %% [markdown]
# # Cross-checking quadrature with simulation
#
# Draw `xi` by inverting the t CDF, cap or truncate, and average the
# discounted payoff. The quadrature price should sit within a few standard
# errors.

# %%
import os

from gosset import McConfig, MarketParams, OptionKind, TailPolicy, gosset_price, mc_call_put

market = MarketParams.from_sigma_t(50.0, 49.0, 0.03, 0.3, 1.0)
samples = int(os.environ.get("GOSSET_MC_SAMPLES", 200_000))
config = McConfig(samples=samples, seed=7)

# %%
for policy in (TailPolicy.capped(p=0.999), TailPolicy.truncated(p=0.999)):
    for nu in (3.0, 5.0, 40.0):
        est = mc_call_put(market, nu, policy, config)
        for kind in OptionKind:
            ref = gosset_price(market, nu, policy, kind).price_now
            e = est[kind]
            print(f"{policy.mode.value:9s} nu={nu:>4} {kind.value:4s} quad={ref:.4f} mc={e.mean:.4f} se={e.std_error:.4f} z={e.z_score(ref):+.2f}")
