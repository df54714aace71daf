# %% [markdown]
# # Where the droplets sit
# At small charge Z the droplets spread out to distance Z^(-1/(s-p)).
# In rescaled coordinates their positions minimize a point energy:
# pair repulsion m_i m_j |y_i - y_j|^-s against attraction m_i |y_i|^-p
# towards the anchor droplet at the origin.

# %%
import numpy as np

from dropletlab import ModelParams, OptimizerOptions, f_energy, minimize_config, two_body_optimum

params = ModelParams(d=3, s=2.0, p=1.0)
r, v = two_body_optimum(1.0, 1.0, params)
print(f"two equal droplets: distance {r}, energy {v}")
res = minimize_config([1.0, 1.0], params)
print(f"multistart: distance {np.linalg.norm(res.points[0]):.8f}, energy {res.value:.10f}")

# %% [markdown]
# More droplets. The minimum is always negative because dilating any
# configuration far enough lets the longer-range attraction win.

# %%
rng = np.random.default_rng(0)
for n in range(1, 6):
    m = rng.uniform(0.5, 2.0, n + 1)
    res = minimize_config(m, params, OptimizerOptions(starts=6, seed=n))
    dist = np.linalg.norm(res.points, axis=1)
    print(f"N={n}  value={res.value:.5f}  converged={res.converged}  |y|={np.round(dist, 3)}")
    assert np.isclose(res.value, f_energy(m, res.points, params).total)
