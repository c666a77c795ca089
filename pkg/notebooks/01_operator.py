# %% [markdown]
# # Extremal operators on symmetric 2x2 matrices
#
# For bounds `0 < a <= A` the maximal operator weighs positive eigenvalues by `A`
# and negative ones by `a`. We compare the closed form with a brute-force supremum
# over sampled diffusion matrices.

# %%
import numpy as np

from pucci_robin import PucciPair, SymMat2, eigs_sym2, pucci_minus, pucci_plus, pucci_sup_sample_oracle

pair = PucciPair(1.0, 4.0)
saddle = SymMat2(2.0, 0.0, -2.0)  # Hessian of x1^2 - x2^2
print("eigenvalues", eigs_sym2(saddle))
print("M+ =", pucci_plus(saddle, pair), " M- =", pucci_minus(saddle, pair))

# %% [markdown]
# The sampled supremum approaches the closed form from below as the sample grows.

# %%
for n in (10**2, 10**4, 10**6):
    print(n, pucci_sup_sample_oracle(saddle, pair, n, seed=1))

# %% [markdown]
# Duality `M-(m) = -M+(-m)` and positive homogeneity on random matrices.

# %%
rng = np.random.default_rng(0)
m = rng.normal(size=(1000, 3))
print("duality", np.abs(pucci_minus(m, pair) + pucci_plus(-m, pair)).max())
print("homogeneity", np.abs(pucci_plus(3.0 * m, pair) - 3.0 * pucci_plus(m, pair)).max())
