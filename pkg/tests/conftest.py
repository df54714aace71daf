import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dropletlab import ModelParams, OptimizerOptions

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def p321():
    return ModelParams(3, 2.0, 1.0)


@pytest.fixture
def p2():
    return ModelParams(2, 1.5, 0.5)


@pytest.fixture
def opts():
    return OptimizerOptions(starts=6, seed=3)


def random_params(rng, dims=(2, 3)):
    d = int(rng.choice(dims))
    s = float(rng.uniform(0.3, d - 0.1))
    p = float(rng.uniform(0.05, s - 0.05))
    return ModelParams(d, s, p)


def random_config(rng, n, d, scale=3.0, min_gap=0.5):
    """Points with pairwise (and anchor) distances at least ``min_gap``."""
    while True:
        y = rng.normal(size=(n, d)) * scale
        Y = np.vstack([np.zeros(d), y])
        dist = np.linalg.norm(Y[:, None] - Y[None], axis=-1)
        if np.min(dist + np.eye(n + 1) * 1e9) > min_gap:
            return y
