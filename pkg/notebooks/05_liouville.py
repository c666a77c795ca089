# %% [markdown]
# # Half-line profile
#
# On `[0, inf)` the problem `M+(u'') = gamma u` with `-u'(0) = 1` has the bounded
# solution `sqrt(A/gamma) exp(-sqrt(gamma/A) x)`. We truncate at `T`, solve with a
# monotone scheme and compare. Ordered data should give ordered solutions.

# %%
from pucci_robin import PucciPair, comparison_sanity, liouville_check

res = liouville_check(PucciPair(1.0, 1.0), gamma=2.0, T=10.0, n=2000)
print("sup error", res.sup_error, " u(0)", res.boundary_value, " exact", res.exact_boundary_value)
print("ordered data keep order:", comparison_sanity(PucciPair(1.0, 1.0), 2.0, 10.0, 500, (1.0, 1.1)))
