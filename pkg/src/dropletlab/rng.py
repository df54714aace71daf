"""Labelled random streams derived from one integer seed."""
import zlib

import numpy as np


def _tag_words(tags):
    return tuple(zlib.crc32(str(t).encode()) for t in tags)


def derive_rng(seed: int, *tags) -> np.random.Generator:
    """Independent generator for ``(seed, *tags)``.

    The same seed and tags always give the same stream; distinct tags give
    statistically independent streams, so concurrent callers never share state.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_tag_words(tags))
    return np.random.Generator(np.random.PCG64(ss))


def uniform_in_ball(rng: np.random.Generator, n: int, d: int, radius=1.0, center=None):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    pts = g * r[:, None]
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return pts


def uniform_on_sphere(rng: np.random.Generator, n: int, d: int):
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
