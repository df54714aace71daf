# %% [markdown]
# # One ball
# A ball of volume m pays surface area plus self-repulsion:
# e0(m) = C1 m^((d-1)/d) + C2 m^((2d-s)/d).
# Small balls are perimeter dominated, large ones repulsion dominated.

# %%
import numpy as np

from dropletlab import ModelParams, e0_ball, m_tilde, multiplier_ball, riesz_constants

params = ModelParams(d=3, s=2.0, p=1.0)
c = riesz_constants(3, 2.0)
print(f"gamma(3,2) = {c.gamma_ds:.12f}  (4 pi^2 = {4 * np.pi**2:.12f})")
print(f"C1 = {c.C1:.6f}, C2 = {c.C2:.6f}")

# %% [markdown]
# Energy per unit mass is smallest at one specific volume. Where e0 turns
# from concave to convex and where splitting in two starts to pay are
# separate thresholds.

# %%
th = m_tilde(params)
print(f"m_tilde = {th.m_tilde:.6f}, inflection = {th.inflection:.6f}")
for m in np.geomspace(0.1, 10, 7):
    print(f"m={m:7.3f}  e0={e0_ball(m, params):9.4f}  e0/m={e0_ball(m, params) / m:7.4f}  "
          f"e0'={multiplier_ball(m, params):7.4f}")
