# %% [markdown]
# # Boundary concentration and blow-up profile
#
# For large `alpha` the positive eigenfunction lives in a layer of width about
# `1/alpha` near the boundary. Away from that layer its sup decays quickly, and
# rescaled by `alpha` the profile looks like `exp(-t)`.

# %%
from pucci_robin import Domain, PucciPair, build_grid, principal_eigen
from pucci_robin.experiments import blowup_profile, concentration_profile, resolution_rule

pair = PucciPair(1.0, 4.0)
dom = Domain.interval(1.0)
for alpha in (4.0, 8.0, 16.0):
    g = build_grid(dom, resolution_rule(0.02)(alpha, 1.0))
    eig = principal_eigen("positive", pair, alpha, g)
    print(alpha, [round(r.sup, 5) for r in concentration_profile(eig, deltas=(0.1, 0.25, 0.4))])

# %%
for r in blowup_profile(eig, alpha=16.0, ts=[0.0, 0.5, 1.0, 1.5, 2.0]):
    print(f"t={r.t:.2f} value={r.value:.4f} exp(-t)={r.reference:.4f}")
