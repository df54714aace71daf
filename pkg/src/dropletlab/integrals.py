"""Riesz cross-interaction and confinement integrals over balls.

Two balls interact through

    D(B1, B2) = int_{B1} int_{B2} |x - y|^-s dx dy
              = int_{R^d} |c + v|^-s V(|v|) dv,

where ``c`` joins the centers and ``V`` is the lens volume of the two balls at
center offset ``v``.  In polar coordinates around ``c`` this is a radial
integral of ``V(u) u^(d-1)`` against the spherical mean of the kernel, which is
itself a one-dimensional integral over the polar angle.  Writing the kernel as
``R^-s (1 + eps)^(-s/2)`` lets the deviation from the point-mass value
``m1 m2 / R^s`` be integrated directly, without cancellation, which is what the
small-Z residual studies need.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .errors import DivergentIntegralError, InvalidInputError, MethodUnsupportedError
from .model import BallDroplet, ModelParams, cap_fraction, lens_volume, unit_ball_volume
from .rng import derive_rng, uniform_in_ball, uniform_on_sphere

METHODS = ("adaptive-1d", "monte-carlo", "far-field", "closed-form")
DEFAULT_SAMPLES = 2_000_000
_CHUNK = 250_000


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    method: str

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError(f"error_estimate must be >= 0, got {self.error_estimate}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def sphere_area(d: int) -> float:
    """(d-1)-measure of the unit sphere in R^d."""
    return d * unit_ball_volume(d)


def _quad(f, a, b, tol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=tol, limit=200, **kw)


def _canonical(b1: BallDroplet, b2: BallDroplet):
    k1 = (b1.mass, tuple(b1.center))
    k2 = (b2.mass, tuple(b2.center))
    return (b1, b2) if k1 <= k2 else (b2, b1)


def _check_kernel(exponent, d, name="s"):
    if exponent >= d:
        raise DivergentIntegralError(f"kernel |x|^-{name} is not integrable for {name}={exponent} >= d={d}")


def _spherical_mean_deviation(u, R, s, d, tol):
    """int over S^{d-1} of [ |c + u sigma|^-s / R^-s - 1 ] d sigma,  |c| = R > u."""

    def f(th):
        eps = (u * u + 2.0 * R * u * math.cos(th)) / (R * R)
        return math.expm1(-0.5 * s * math.log1p(eps)) * math.sin(th) ** (d - 2)

    val, _ = _quad(f, 0.0, math.pi, tol * 1e-2)
    return (d - 1) * unit_ball_volume(d - 1) * val


def riesz_cross_deviation(b1: BallDroplet, b2: BallDroplet, params: ModelParams, tol=None) -> QuadratureResult:
    """``D(B1,B2) - m1 m2 / R^s`` for disjoint balls, integrated without cancellation."""
    _check_kernel(params.s, params.d)
    b1, b2 = _canonical(b1, b2)
    R = float(np.linalg.norm(b1.center - b2.center))
    r1, r2 = b1.radius, b2.radius
    if not R > r1 + r2:
        raise MethodUnsupportedError(
            f"adaptive-1d needs disjoint balls (R={R:.6g} <= r1+r2={r1 + r2:.6g}); use monte-carlo"
        )
    tol = params.tol if tol is None else tol
    d, s = params.d, params.s

    def f(u):
        return u ** (d - 1) * lens_volume(u, r1, r2, d) * _spherical_mean_deviation(u, R, s, d, tol)

    val, err = _quad(f, 0.0, r1 + r2, tol)
    scale = R ** (-s)
    return QuadratureResult(scale * val, scale * err + tol * abs(scale * val), "adaptive-1d")


def far_field_riesz(m1: float, m2: float, R: float, params: ModelParams) -> QuadratureResult:
    """Point-mass approximation ``m1 m2 / R^s`` with a rigorous mean-value bound.

    For ``R >= 2 (r1+r2)`` the bound is ``C R^(-s-1)`` with
    ``C = s 2^(s+1) (r1+r2) m1 m2``; closer in it is
    ``s m1 m2 (r1+r2) (R-r1-r2)^(-s-1)``, and infinite for overlapping balls.
    """
    if not R > 0:
        raise InvalidInputError(f"R must be > 0, got {R}")
    d, s = params.d, params.s
    rsum = _radius(m1, d) + _radius(m2, d)
    value = m1 * m2 * R ** (-s)
    if R >= 2 * rsum:
        bound = s * 2 ** (s + 1) * rsum * m1 * m2 * R ** (-s - 1)
    elif R > rsum:
        bound = s * m1 * m2 * rsum * (R - rsum) ** (-s - 1)
    else:
        bound = math.inf
    return QuadratureResult(value, bound, "far-field")


def _radius(m, d):
    if not m > 0:
        raise InvalidInputError(f"mass must be > 0, got {m}")
    return (m / unit_ball_volume(d)) ** (1.0 / d)


def _mc_ray_cross(b1, b2, s, d, samples, rng):
    """Sample x uniformly in B1 and a direction sigma; the y-integral over B2
    along the ray is exact, which keeps the estimator bounded for any s < d."""
    area = sphere_area(d)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        n = min(_CHUNK, samples - done)
        x = uniform_in_ball(rng, n, d, b1.radius, b1.center)
        sig = uniform_on_sphere(rng, n, d)
        q = x - b2.center
        b = np.einsum("ij,ij->i", q, sig)
        disc = b * b - (np.einsum("ij,ij->i", q, q) - b2.radius**2)
        hit = disc > 0
        root = np.sqrt(np.where(hit, disc, 0.0))
        t_out = np.where(hit, -b + root, 0.0)
        t_in = np.clip(-b - root, 0.0, None)
        t_out = np.maximum(t_out, t_in)
        vals = (t_out ** (d - s) - t_in ** (d - s)) / (d - s)
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += n
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    scale = b1.mass * area
    return scale * mean, scale * math.sqrt(var / (samples - 1))


def riesz_cross_energy(
    b1: BallDroplet,
    b2: BallDroplet,
    params: ModelParams,
    method: str = "adaptive-1d",
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    tag: str = "riesz_cross",
    tol=None,
) -> QuadratureResult:
    """Riesz interaction ``D(B1,B2)`` of two balls (one ordered pair).

    ``adaptive-1d`` and ``far-field`` need disjoint balls; ``monte-carlo``
    accepts any placement and reports one standard error.
    """
    d, s = params.d, params.s
    _check_kernel(s, d)
    if b1.d != d or b2.d != d:
        raise InvalidInputError("ball centers must live in R^d")
    b1, b2 = _canonical(b1, b2)
    R = float(np.linalg.norm(b1.center - b2.center))
    if method == "adaptive-1d":
        dev = riesz_cross_deviation(b1, b2, params, tol)
        far = b1.mass * b2.mass * R ** (-s)
        return QuadratureResult(far + dev.value, dev.error_estimate, "adaptive-1d")
    if method == "far-field":
        if not R > b1.radius + b2.radius:
            raise MethodUnsupportedError("far-field needs disjoint balls")
        return far_field_riesz(b1.mass, b2.mass, R, params)
    if method == "monte-carlo":
        rng = derive_rng(seed, tag)
        value, se = _mc_ray_cross(b1, b2, s, d, int(samples), rng)
        return QuadratureResult(float(value), float(se), "monte-carlo")
    raise MethodUnsupportedError(f"unknown method {method!r}")


def confinement_closed_form(radius: float, params: ModelParams) -> float:
    """``int_{B_r(0)} |x|^-p dx = d omega_d r^(d-p) / (d-p)``."""
    d, p = params.d, params.p
    _check_kernel(p, d, "p")
    return d * unit_ball_volume(d) * radius ** (d - p) / (d - p)


def _sphere_fraction_inside(u, a, r, d):
    """Fraction of the sphere |x| = u lying inside the ball B_r(c), |c| = a."""
    if a == 0.0:
        return 1.0 if u <= r else 0.0
    if u == 0.0:
        return 1.0 if a < r else (0.5 if a == r else 0.0)
    h = (u * u + a * a - r * r) / (2.0 * u * a)
    # cap of the (d-1)-sphere = cap_fraction of dimension d-2
    return cap_fraction(h, d - 2) if h < 1 else 0.0


def confinement_integral(
    b: BallDroplet,
    params: ModelParams,
    method: str = "adaptive-1d",
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    tag: str = "confinement",
    tol=None,
    closed_form: bool = True,
) -> QuadratureResult:
    """``V(B) = int_B |x|^-p dx`` (the Z factor is not included).

    Origin-centered balls use the closed form unless ``closed_form=False``.
    Otherwise the integral runs over spheres |x| = u, weighting by the fraction
    of each sphere inside the ball; when the origin is strictly inside the ball
    the singular inner shell is done in closed form.
    """
    d, p = params.d, params.p
    _check_kernel(p, d, "p")
    tol = params.tol if tol is None else tol
    a = float(np.linalg.norm(b.center))
    r = b.radius
    if method == "monte-carlo":
        rng = derive_rng(seed, tag)
        total = total_sq = 0.0
        done = 0
        while done < samples:
            n = min(_CHUNK, samples - done)
            x = uniform_in_ball(rng, n, d, r, b.center)
            vals = np.linalg.norm(x, axis=1) ** (-p)
            total += vals.sum()
            total_sq += (vals * vals).sum()
            done += n
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        return QuadratureResult(float(b.mass * mean), float(b.mass * math.sqrt(var / (samples - 1))), "monte-carlo")
    if method == "far-field":
        return far_field_confinement(b.mass, a, params)
    if method != "adaptive-1d":
        raise MethodUnsupportedError(f"unknown method {method!r}")
    if a == 0.0 and closed_form:
        return QuadratureResult(confinement_closed_form(r, params), 0.0, "closed-form")
    area = sphere_area(d)
    inner = 0.0
    lo = abs(a - r)
    if 0.0 < a < r:
        inner = confinement_closed_form(r - a, params)
    if a == 0.0 or lo == 0.0:
        val, err = _quad(
            lambda u: _sphere_fraction_inside(u, a, r, d), 0.0, a + r, tol, weight="alg", wvar=(d - 1 - p, 0.0)
        )
    else:
        val, err = _quad(lambda u: u ** (d - 1 - p) * _sphere_fraction_inside(u, a, r, d), lo, a + r, tol)
    value = inner + area * val
    return QuadratureResult(value, area * err + tol * abs(value), "adaptive-1d")


def confinement_deviation(b: BallDroplet, params: ModelParams, tol=None) -> QuadratureResult:
    """``V(B) - m / |c|^p`` for a ball not containing the origin, without cancellation."""
    d, p = params.d, params.p
    a = float(np.linalg.norm(b.center))
    r = b.radius
    if not a > r:
        raise MethodUnsupportedError("confinement deviation needs the origin outside the ball")
    tol = params.tol if tol is None else tol

    def f(u):
        rel = math.expm1(-p * math.log1p((u - a) / a))
        return u ** (d - 1) * _sphere_fraction_inside(u, a, r, d) * rel

    val, err = _quad(f, a - r, a + r, tol, points=[a])
    scale = sphere_area(d) * a ** (-p)
    return QuadratureResult(scale * val, scale * err + tol * abs(scale * val), "adaptive-1d")


def far_field_confinement(mass: float, R: float, params: ModelParams) -> QuadratureResult:
    """``m / R^p`` with the mean-value bound ``p m r (R - r)^(-p-1)``.

    For ``R >= 2r`` the bound is reported as ``p 2^(p+1) r m R^(-p-1)``.
    """
    if not R > 0:
        raise InvalidInputError(f"R must be > 0, got {R}")
    p = params.p
    r = _radius(mass, params.d)
    if R >= 2 * r:
        bound = p * 2 ** (p + 1) * r * mass * R ** (-p - 1)
    elif R > r:
        bound = p * mass * r * (R - r) ** (-p - 1)
    else:
        bound = math.inf
    return QuadratureResult(mass * R ** (-p), bound, "far-field")
