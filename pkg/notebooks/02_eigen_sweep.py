# %% [markdown]
# # Principal demi-eigenvalues on an interval
#
# On `[0, L]` the positive mode is a `cosh` profile with `lambda+ = -A mu^2`, where
# `mu tanh(mu L / 2) = alpha`. The numerical pair comes from inverse power
# iteration wrapped around Howard policy iteration.

# %%
from pucci_robin import Domain, PucciPair, build_grid, oracle_interval, principal_eigen
from pucci_robin.experiments import resolution_rule, rows_to_csv, sweep_alpha

pair = PucciPair(1.0, 4.0)
dom = Domain.interval(1.0)
grid = build_grid(dom, 1024)
res = principal_eigen("positive", pair, 4.0, grid)
print("lambda+ =", res.lam, " bracket", (-res.cw_hi, -res.cw_lo), " oracle", oracle_interval(pair, 4.0, 1.0).lam)

# %% [markdown]
# ## Sweep in alpha
#
# The ratios `lambda / -alpha^2` approach `A` and `a` for the two modes. With the
# default first-order boundary row the error is of order `alpha h`, so a finer
# rule is used here.

# %%
rows = sweep_alpha(dom, pair, [1, 2, 4, 8, 16], resolution_rule(0.01))
print(rows_to_csv(rows))
