# %% [markdown]
# # Small-charge asymptotics
# Place balls at the rescaled optimal positions, compute the exact energy
# (quadrature for every interaction) and compare with the leading-order
# prediction sum e0(m_i) - Z V(B_0) + Z^(s/(s-p)) min F.

# %%
import numpy as np

from dropletlab import ModelParams, ez_to_e0_sweep, expansion_residual_sweep, two_body_optimum
from dropletlab.asymptotics import separation_scaling_sweep, splitting_upper_bound, split_threshold

params = ModelParams(d=3, s=2.0, p=1.0)
r, _ = two_body_optimum(1.0, 1.0, params)
sw = expansion_residual_sweep([1.0, 1.0], [[r, 0, 0]], params, np.geomspace(1e-2, 1e-4, 5))
print(sw.to_csv())
print(f"residual decays like Z^{sw.slope:.3f}")

# %% [markdown]
# The residual exponent is (s+2)/(s-p) rather than (s+1)/(s-p). A ball's
# potential outside the ball differs from a point mass's only at second
# order in its radius, so the first correction cancels.

# %%
out = separation_scaling_sweep(1.0, 1.0, params, np.geomspace(1e-1, 1e-4, 7))
print("optimal separations", np.round(out["R"], 3), "slope", round(out["slope"], 5))

# %%
M = 4 * split_threshold(params)
print(splitting_upper_bound(M, 1e-3, params))

# %% [markdown]
# As Z goes to 0 the optimal generalized energy approaches the Z = 0 value,
# at most linearly in Z.

# %%
for row in ez_to_e0_sweep(2.0, params, np.geomspace(0.1, 1e-4, 4)):
    print(row)
