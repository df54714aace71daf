# %% [markdown]
# # Splitting the mass
# Ignoring the weak long-range terms, total mass M is shared among balls
# to minimize the sum of e0. Interior optima balance the multipliers e0'(m_i).
# Above a threshold mass the best split uses equal balls.

# %%
import numpy as np

from dropletlab import ModelParams, inflection_mass, minimize_masses, optimal_droplet_count, split_threshold

params = ModelParams(d=3, s=2.0, p=1.0)
th = split_threshold(params)
print(f"one ball stops being optimal at M = {th:.6f}")
print(f"inflection mass {inflection_mass(params):.6f}")

# %%
for M in (0.5, 1.0, 2.0, 4.0, 8.0):
    n, res = optimal_droplet_count(M, 12, params)
    print(f"M={M:4.1f}  droplets={n + 1}  masses={np.round(res.partition, 4)}  value={res.value:.4f}")

# %% [markdown]
# With the background charge on, the anchor ball at the origin gains
# -Z V(B) and grows at the expense of the others.

# %%
confined = params.replace(Z=0.3)
res = minimize_masses(4.0, 3, confined, with_confinement=True)
print("masses", np.round(res.partition, 5), "multipliers", np.round(res.multipliers, 8))
