"""Model parameters, ball geometry and single-ball energies.

The only geometric primitive is the ball.  For a ball of volume ``m`` in R^d
the Gamow energy (perimeter plus Riesz self-repulsion) is

    e0(m) = C1 * m**((d-1)/d) + C2 * m**((2d-s)/d)

with ``C1 = d * omega_d**(1/d)`` and ``C2 = gamma(d,s) * omega_d**(-(2d-s)/d)``,
where ``gamma(d,s)`` is the Riesz self-energy of the unit ball.  ``gamma`` is
computed from a one-dimensional reduction over the lens volume of two unit
balls, so no hypergeometric functions are needed.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegralError, InvalidInputError

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Dimension ``d``, Riesz exponent ``s``, confinement exponent ``p``,
    attraction weight ``Z`` and total mass ``M``.

    ``tol`` is the relative tolerance used by every quadrature downstream.
    """

    d: int
    s: float
    p: float
    Z: float = 0.0
    M: float = 1.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InvalidInputError(f"d must be an integer >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not 0 < self.p < self.s < self.d:
            raise InvalidInputError(
                f"need 0 < p < s < d, got p={self.p}, s={self.s}, d={self.d}"
            )
        if not self.Z >= 0:
            raise InvalidInputError(f"Z must be >= 0, got {self.Z}")
        if not self.M > 0:
            raise InvalidInputError(f"M must be > 0, got {self.M}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be > 0, got {self.tol}")

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BallDroplet:
    center: np.ndarray
    mass: float
    radius: float = field(init=False)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1:
            raise InvalidInputError("center must be a 1-D point")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", ball_radius(self.mass, center.size))

    @property
    def d(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class RieszConstants:
    d: int
    s: float
    omega_d: float
    gamma_ds: float
    gamma_error: float
    C1: float
    C2: float
    tolerance: float

    def to_json(self) -> str:
        keys = ("d", "s", "omega_d", "gamma_ds", "C1", "C2", "tolerance")
        return json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True)


class MassThresholds(NamedTuple):
    m_tilde: float
    inflection: float


def unit_ball_volume(d: int) -> float:
    if d < 1:
        raise InvalidInputError(f"d must be >= 1, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_radius(mass: float, d: int) -> float:
    if not mass > 0:
        raise InvalidInputError(f"ball mass must be > 0, got {mass}")
    return (mass / unit_ball_volume(d)) ** (1.0 / d)


def _check_ds(d, s):
    if int(d) != d or d < 1:
        raise InvalidInputError(f"d must be a positive integer, got {d}")
    if s >= d:
        raise DivergentIntegralError(f"Riesz self-energy diverges for s >= d (s={s}, d={d})")
    if not s > 0:
        raise InvalidInputError(f"s must be > 0, got {s}")


def cap_fraction(h, d: int):
    """Fraction of a d-ball's volume lying beyond the hyperplane at signed
    height ``h`` (in radii) from its center."""
    h = np.clip(np.asarray(h, dtype=float), -1.0, 1.0)
    half = 0.5 * special.betainc((d + 1) / 2, 0.5, 1.0 - h * h)
    out = np.where(h >= 0, half, 1.0 - half)
    return out if out.ndim else float(out)


def lens_volume(u: float, r1: float, r2: float, d: int) -> float:
    """Volume of the intersection of two d-balls with radii ``r1``, ``r2`` and
    center distance ``u``."""
    if u >= r1 + r2:
        return 0.0
    if u <= abs(r1 - r2):
        return unit_ball_volume(d) * min(r1, r2) ** d
    a1 = (u * u + r1 * r1 - r2 * r2) / (2 * u)
    a2 = u - a1
    return unit_ball_volume(d) * (
        r1**d * cap_fraction(a1 / r1, d) + r2**d * cap_fraction(a2 / r2, d)
    )


@lru_cache(maxsize=None)
def _gamma_quad(d: int, s: float, tol: float):
    # gamma = d*omega_d * int_0^2 u^(d-1-s) V(u) du; the algebraic weight takes
    # care of the u^(d-1-s) endpoint singularity when s > d-1.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda u: lens_volume(u, 1.0, 1.0, d),
            0.0,
            2.0,
            weight="alg",
            wvar=(d - 1 - s, 0.0),
            epsabs=0.0,
            epsrel=tol,
            limit=200,
        )
    scale = d * unit_ball_volume(d)
    return scale * val, scale * err


def riesz_unit_ball_self_energy(d: int, s: float, tol: float = DEFAULT_TOL) -> float:
    """Double integral of |x-y|^-s over the unit ball times itself."""
    _check_ds(d, s)
    return _gamma_quad(int(d), float(s), float(tol))[0]


@lru_cache(maxsize=None)
def riesz_constants(d: int, s: float, tol: float = DEFAULT_TOL) -> RieszConstants:
    _check_ds(d, s)
    gamma, err = _gamma_quad(int(d), float(s), float(tol))
    omega = unit_ball_volume(d)
    return RieszConstants(
        d=int(d),
        s=float(s),
        omega_d=omega,
        gamma_ds=gamma,
        gamma_error=err,
        C1=d * omega ** (1.0 / d),
        C2=gamma * omega ** (-(2.0 * d - s) / d),
        tolerance=float(tol),
    )


def _constants(params: ModelParams) -> RieszConstants:
    return riesz_constants(params.d, float(params.s), float(params.tol))


def _masses(mass, allow_zero=False):
    m = np.asarray(mass, dtype=float)
    bad = (m < 0) if allow_zero else (m <= 0)
    if np.any(bad) or np.any(~np.isfinite(m)):
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidInputError(f"mass must be {bound}, got {mass}")
    return m


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def perimeter_ball(mass, params: ModelParams):
    m = _masses(mass)
    return _out(_constants(params).C1 * m ** ((params.d - 1) / params.d))


def riesz_self_energy_ball(mass, params: ModelParams):
    m = _masses(mass, allow_zero=True)
    d, s = params.d, params.s
    return _out(_constants(params).C2 * m ** ((2 * d - s) / d))


def e0_ball(mass, params: ModelParams):
    """Perimeter plus Riesz self-energy of a ball of the given volume; 0 at m=0.

    Accepts scalars or arrays.
    """
    m = _masses(mass, allow_zero=True)
    c = _constants(params)
    d, s = params.d, params.s
    return _out(c.C1 * m ** ((d - 1) / d) + c.C2 * m ** ((2 * d - s) / d))


def multiplier_ball(mass, params: ModelParams):
    """d/dm of ``e0_ball``: the constant Lagrange multiplier of a ball of mass m."""
    m = _masses(mass)
    c = _constants(params)
    d, s = params.d, params.s
    return _out(
        c.C1 * (d - 1) / d * m ** (-1.0 / d) + c.C2 * (2 * d - s) / d * m ** ((d - s) / d)
    )


def e0_second_derivative(mass, params: ModelParams):
    m = _masses(mass)
    c = _constants(params)
    d, s = params.d, params.s
    return _out(
        -c.C1 * (d - 1) / d**2 * m ** (-1.0 / d - 1)
        + c.C2 * (2 * d - s) * (d - s) / d**2 * m ** (-s / d)
    )


def m_tilde(params: ModelParams) -> MassThresholds:
    """Return ``(C1/C2)**(d/(1+d-s))`` together with the inflection mass of e0.

    The inflection mass is where e0 changes from concave to convex; it sits a
    fixed factor ``((d-1)/((2d-s)(d-s)))**(d/(1+d-s))`` below ``m_tilde``.
    """
    c = _constants(params)
    d, s = params.d, params.s
    expo = d / (1 + d - s)
    mt = (c.C1 / c.C2) ** expo
    infl = (c.C1 * (d - 1) / (c.C2 * (2 * d - s) * (d - s))) ** expo
    return MassThresholds(mt, infl)


def inflection_mass(params: ModelParams) -> float:
    return m_tilde(params).inflection
