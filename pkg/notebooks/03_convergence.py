# %% [markdown]
# # Grid convergence
#
# The boundary row is first order, so errors should halve with `h`. Richardson
# extrapolation over the sequence gives an error estimate that tracks the true
# error against the closed form.

# %%
from pucci_robin import Domain, PucciPair
from pucci_robin.experiments import convergence_study, rows_to_csv

rows = convergence_study(Domain.interval(1.0), PucciPair(1.0, 4.0), 4.0, [128, 256, 512, 1024, 2048])
print(rows_to_csv(rows))

# %% [markdown]
# On the square with `a == A` the operator is linear and the spectrum separates.

# %%
rows = convergence_study(Domain.rectangle(1.0, 1.0), PucciPair(1.0, 1.0), 2.0, [33, 65, 129])
for r in rows:
    print(r.n, r.lam, r.oracle, r.error_vs_oracle)
