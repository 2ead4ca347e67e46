# %% [markdown]
# # How fat are the tails?
#
# Daily index returns put far more mass in the tails than a normal law
# allows. This script compares Student's t with the normal at the levels
# used for capping, and shows how quickly the gap grows.

# %%
import math

from gosset import normal_quantile, t_quantile, tail_mass_ratio
from gosset.reports import table_ii, table_iii, write_csv

# %% [markdown]
# Probability of a move beyond `k` standard units, relative to the normal.

# %%
for k in (2, 4, 6, 10):
    print(f"k={k:>2}  nu=3: {tail_mass_ratio(3, k):10.3g}   nu=5: {tail_mass_ratio(5, k):10.3g}")

# %% [markdown]
# Critical values `x_c(p)` with the growth factor `exp(sigma_T x_c)` at
# `sigma_T = 0.4`. At `p = 0.9999` the t(5) asset may grow roughly
# forty-eight fold; the normal allows less than five.

# %%
header, rows = table_ii()
print(write_csv(header, [[r[0]] + [round(v, 4) for v in r[1:]] for r in rows]))

# %% [markdown]
# Critical values across shapes; the last row is the normal limit.

# %%
header, rows = table_iii()
print(write_csv(header, [[r[0]] + [round(v, 4) for v in r[1:]] for r in rows]))

# %%
print("x_c(0.999) at nu=1e6:", t_quantile(0.999, 1e6), " normal:", normal_quantile(0.999))
