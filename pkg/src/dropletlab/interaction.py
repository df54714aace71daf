"""Discrete interaction energy of droplet positions.

For masses ``m = (m0, ..., mN)`` and points ``y1..yN`` (the anchor ``y0 = 0``
is implicit and never stored)

    F(y) = sum_{i != j} m_i m_j / |y_i - y_j|^s  -  sum_{i>=1} m_i / |y_i|^p

The repulsion runs over ordered pairs, so every unordered pair is counted twice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError, InvalidInputError
from .model import ModelParams


@dataclass(frozen=True)
class EnergyParts:
    repulsion: float
    attraction: float

    @property
    def total(self) -> float:
        return self.repulsion - self.attraction

    def to_dict(self) -> dict:
        return {"repulsion": self.repulsion, "attraction": self.attraction, "total": self.total}


def check_masses(masses, total=None, rtol=1e-12) -> np.ndarray:
    """Validate a mass vector ``(m0, ..., mN)``; optionally check it sums to ``total``."""
    m = np.asarray(masses, dtype=float)
    if m.ndim != 1 or m.size < 1:
        raise InvalidInputError("masses must be a non-empty 1-D sequence")
    if np.any(~(m > 0)):
        raise InvalidInputError(f"all masses must be > 0, got {m.tolist()}")
    if total is not None and abs(m.sum() - total) > rtol * abs(total):
        raise InvalidInputError(f"masses sum to {m.sum()!r}, expected {total!r}")
    return m


def check_points(points, n_movable: int, d: int) -> np.ndarray:
    y = np.asarray(points, dtype=float)
    if n_movable == 0:
        return np.zeros((0, d))
    if y.size != n_movable * d:
        raise InvalidInputError(f"expected {n_movable} points in R^{d}, got shape {np.shape(points)}")
    return y.reshape(n_movable, d)


def _all_points(masses, points, params):
    m = check_masses(masses)
    y = check_points(points, m.size - 1, params.d)
    return m, np.vstack([np.zeros((1, params.d)), y])


def _pair_geometry(Y):
    diff = Y[:, None, :] - Y[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = len(Y)
    off = ~np.eye(n, dtype=bool)
    bad = np.argwhere(off & (dist == 0))
    if bad.size:
        pairs = sorted({tuple(sorted(p)) for p in bad.tolist()})
        raise DegenerateConfigurationError(pairs)
    np.fill_diagonal(dist, np.inf)
    return diff, dist


def f_energy(masses, points, params: ModelParams) -> EnergyParts:
    m, Y = _all_points(masses, points, params)
    _, dist = _pair_geometry(Y)
    rep = float(np.sum(np.outer(m, m) * dist ** (-params.s)))
    att = float(np.sum(m[1:] * dist[0, 1:] ** (-params.p)))
    return EnergyParts(rep, att)


def f_gradient(masses, points, params: ModelParams) -> np.ndarray:
    """Gradient with respect to the movable points, shape ``(N, d)``."""
    m, Y = _all_points(masses, points, params)
    diff, dist = _pair_geometry(Y)
    s, p = params.s, params.p
    w = np.outer(m, m) * dist ** (-s - 2)
    grad = -2.0 * s * np.einsum("ij,ijk->ik", w, diff)
    r0 = dist[0, :]
    grad += p * (m * r0 ** (-p - 2))[:, None] * Y
    return grad[1:]


def f_scaling_split(masses, points, params: ModelParams, lam: float):
    """Repulsion and attraction of the configuration scaled by ``lam``, from
    homogeneity: ``(repulsion * lam^-s, attraction * lam^-p)``."""
    if not lam > 0:
        raise InvalidInputError(f"scale factor must be > 0, got {lam}")
    parts = f_energy(masses, points, params)
    return parts.repulsion * lam ** (-params.s), parts.attraction * lam ** (-params.p)


def two_body_optimum(m0: float, m1: float, params: ModelParams):
    """Optimal distance and minimum of ``2 m0 m1 r^-s - m1 r^-p``."""
    check_masses([m0, m1])
    s, p = params.s, params.p
    r = (2.0 * s * m0 / p) ** (1.0 / (s - p))
    return r, 2.0 * m0 * m1 * r ** (-s) - m1 * r ** (-p)
