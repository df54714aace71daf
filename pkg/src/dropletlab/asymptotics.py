"""Small-Z structure of ball configurations.

A generalized configuration places the anchor ball of mass ``m0`` at the
origin and balls of mass ``m_i`` at ``x_i = Z^(-1/(s-p)) y_i``.  Its energy is
compared with the three-term prediction

    sum_i e0(m_i) - Z V(B0) + Z^(s/(s-p)) F(y)

and the residual is assembled from the far-field deviations of the cross and
confinement integrals, which are integrated without cancellation.  That keeps
residuals meaningful far below the roundoff level of the energies themselves.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .errors import BracketError, InvalidConfigurationError, InvalidInputError
from .integrals import (
    confinement_closed_form,
    confinement_deviation,
    far_field_confinement,
    far_field_riesz,
    riesz_cross_deviation,
)
from .interaction import check_masses, check_points, f_energy, two_body_optimum
from .model import (
    BallDroplet,
    ModelParams,
    ball_radius,
    e0_ball,
    perimeter_ball,
    riesz_constants,
    riesz_self_energy_ball,
)
from .optimizer import minimize_masses, optimal_droplet_count

CSV_HEADER = ("Z", "exact", "predicted", "residual")


def separation_scale(Z: float, params: ModelParams) -> float:
    if not Z > 0:
        raise InvalidInputError(f"Z must be > 0, got {Z}")
    return Z ** (-1.0 / (params.s - params.p))


@dataclass(frozen=True)
class GeneralizedConfig:
    partition: np.ndarray
    scaled_points: np.ndarray
    Z: float

    def __post_init__(self):
        m = check_masses(self.partition)
        if not self.Z >= 0:
            raise InvalidInputError(f"Z must be >= 0, got {self.Z}")
        y = np.asarray(self.scaled_points, dtype=float)
        object.__setattr__(self, "partition", m)
        object.__setattr__(self, "scaled_points", y.reshape(m.size - 1, -1) if m.size > 1 else np.zeros((0, y.shape[-1] if y.ndim == 2 else 0)))
        object.__setattr__(self, "Z", float(self.Z))

    @property
    def N(self) -> int:
        return self.partition.size - 1

    def physical_centers(self, params: ModelParams) -> np.ndarray:
        """Centers ``x_0 = 0`` and ``x_i = Z^(-1/(s-p)) y_i``, shape ``(N+1, d)``."""
        y = check_points(self.scaled_points, self.N, params.d)
        if self.N and self.Z == 0:
            raise InvalidConfigurationError("droplets sit at infinity when Z = 0", Z=0.0)
        t = separation_scale(self.Z, params) if self.N else 0.0
        return np.vstack([np.zeros((1, params.d)), t * y])

    def balls(self, params: ModelParams):
        return [BallDroplet(c, m) for c, m in zip(self.physical_centers(params), self.partition)]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy parts of a ball configuration.

    ``confinement`` is ``Z * sum_i V(B_i)``, stored positive and subtracted.
    The cross and confinement terms are also split into point-mass values and
    deviations so residual studies never subtract large numbers.
    """

    perimeter: float
    riesz_self: float
    cross_far: float
    cross_deviation: float
    confinement_anchor: float
    confinement_far: float
    confinement_deviation: float
    error_estimate: float

    def __post_init__(self):
        for k, v in asdict(self).items():
            object.__setattr__(self, k, float(v))

    @property
    def riesz(self) -> float:
        return self.riesz_self + self.cross_far + self.cross_deviation

    @property
    def confinement(self) -> float:
        return self.confinement_anchor + self.confinement_far + self.confinement_deviation

    @property
    def total(self) -> float:
        return self.perimeter + self.riesz - self.confinement

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(riesz=self.riesz, confinement=self.confinement, total=self.total)
        return out


def _check_disjoint(balls, Z):
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            gap = np.linalg.norm(balls[i].center - balls[j].center) - balls[i].radius - balls[j].radius
            if not gap > 0:
                raise InvalidConfigurationError(f"droplets {i} and {j} overlap at Z={Z}", Z=Z)


def exact_energy_balls(gc: GeneralizedConfig, params: ModelParams) -> EnergyBreakdown:
    """Full energy of the ball configuration at weight ``gc.Z``.

    Cross interactions run over ordered pairs.  At ``Z = 0`` the non-anchor
    droplets sit at infinity and only the single-ball energies remain.
    """
    m = gc.partition
    Z = gc.Z
    per = float(np.sum(perimeter_ball(m, params)))
    self_r = float(np.sum(riesz_self_energy_ball(m, params)))
    conf0 = Z * confinement_closed_form(ball_radius(m[0], params.d), params)
    if gc.N == 0 or Z == 0:
        return EnergyBreakdown(per, self_r, 0.0, 0.0, conf0, 0.0, 0.0, 0.0)
    balls = gc.balls(params)
    _check_disjoint(balls, Z)
    far = dev = err = 0.0
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            R = float(np.linalg.norm(balls[i].center - balls[j].center))
            q = riesz_cross_deviation(balls[i], balls[j], params)
            far += 2 * m[i] * m[j] * R ** (-params.s)
            dev += 2 * q.value
            err += 2 * q.error_estimate
    cfar = cdev = 0.0
    for b in balls[1:]:
        a = float(np.linalg.norm(b.center))
        q = confinement_deviation(b, params)
        cfar += Z * b.mass * a ** (-params.p)
        cdev += Z * q.value
        err += Z * q.error_estimate
    c = riesz_constants(params.d, float(params.s), float(params.tol))
    err += c.gamma_error / c.gamma_ds * self_r
    return EnergyBreakdown(per, self_r, far, dev, conf0, cfar, cdev, err)


def predicted_energy(gc: GeneralizedConfig, params: ModelParams) -> float:
    """Three-term small-Z prediction for the configuration."""
    m = gc.partition
    Z = gc.Z
    value = float(np.sum(e0_ball(m, params)))
    value -= Z * confinement_closed_form(ball_radius(m[0], params.d), params)
    if gc.N and Z > 0:
        F = f_energy(m, gc.scaled_points, params).total
        value += Z ** (params.s / (params.s - params.p)) * F
    return value


def far_field_bound(gc: GeneralizedConfig, params: ModelParams) -> float:
    """Sum of the mean-value far-field bounds over ordered pairs and confinements."""
    if gc.N == 0 or gc.Z == 0:
        return 0.0
    balls = gc.balls(params)
    total = 0.0
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            R = float(np.linalg.norm(balls[i].center - balls[j].center))
            total += 2 * far_field_riesz(balls[i].mass, balls[j].mass, R, params).error_estimate
    for b in balls[1:]:
        total += gc.Z * far_field_confinement(b.mass, float(np.linalg.norm(b.center)), params).error_estimate
    return total


@dataclass(frozen=True)
class ExpansionReport:
    """``residual`` equals ``exact - predicted`` in exact arithmetic; it is
    assembled from the deviation terms, so it stays accurate where the float
    difference of the two totals would be pure roundoff."""

    Z: float
    exact: float
    predicted: float
    residual: float
    bound: float

    def __post_init__(self):
        for k, v in asdict(self).items():
            object.__setattr__(self, k, float(v))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResidualSweep:
    reports: list
    slope: float | None
    intercept: float | None
    fit_residual: float | None
    exact_match: bool

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "slope": self.slope,
            "intercept": self.intercept,
            "fit_residual": self.fit_residual,
            "exact_match": self.exact_match,
        }

    def to_csv(self) -> str:
        return reports_to_csv(self.reports)


def expansion_report(gc: GeneralizedConfig, params: ModelParams) -> ExpansionReport:
    br = exact_energy_balls(gc, params)
    pred = predicted_energy(gc, params)
    residual = br.cross_deviation - br.confinement_deviation
    return ExpansionReport(gc.Z, br.total, pred, residual, far_field_bound(gc, params))


def loglog_fit(x, y):
    """Least-squares line through ``(log x, log |y|)``: (slope, intercept, rms misfit)."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float)))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    misfit = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return float(coef[0]), float(coef[1]), misfit


def expansion_residual_sweep(partition, scaled_points, params: ModelParams, Z_grid) -> ResidualSweep:
    """Residual ``exact - predicted`` over ``Z_grid`` and its log-log slope."""
    Z_grid = [float(z) for z in Z_grid]
    if not Z_grid or any(not z > 0 for z in Z_grid):
        raise InvalidInputError("Z_grid must be non-empty and strictly positive")
    reports = [expansion_report(GeneralizedConfig(partition, scaled_points, z), params) for z in Z_grid]
    res = [r.residual for r in reports]
    if all(r == 0.0 for r in res):
        return ResidualSweep(reports, None, None, None, True)
    if len(Z_grid) < 2 or any(r == 0.0 for r in res):
        return ResidualSweep(reports, None, None, None, False)
    slope, icept, misfit = loglog_fit(Z_grid, res)
    return ResidualSweep(reports, slope, icept, misfit, False)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([repr(float(r.Z)), repr(float(r.exact)), repr(float(r.predicted)), repr(float(r.residual))])
    return buf.getvalue()


# --- separation scaling ------------------------------------------------------


def optimal_two_droplet_separation(m0: float, m1: float, Z: float, params: ModelParams, tol: float = 1e-10):
    """Minimize the full ball energy over the distance between an anchor ball
    and one satellite.  Returns the physical separation ``R(Z)``.

    The search runs in the scaled variable ``rho = R Z^(1/(s-p))`` where the
    energy, divided by ``Z^(s/(s-p))``, is of order one.
    """
    t = separation_scale(Z, params)
    rho_star, _ = two_body_optimum(m0, m1, params)
    rmin = 1.001 * (ball_radius(m0, params.d) + ball_radius(m1, params.d)) / t
    scale = Z ** (-params.s / (params.s - params.p))
    e1 = np.eye(params.d)[0]

    def energy(rho):
        br = exact_energy_balls(GeneralizedConfig([m0, m1], [rho * e1], Z), params)
        moving = br.cross_far + br.cross_deviation - br.confinement_far - br.confinement_deviation
        return scale * moving

    lo, hi = max(rmin, 0.2 * rho_star), 5.0 * rho_star
    res = optimize.minimize_scalar(energy, bounds=(lo, hi), method="bounded", options={"xatol": tol * rho_star})
    return float(res.x) * t


def separation_scaling_sweep(m0, m1, params: ModelParams, Z_grid):
    """Optimal separations over ``Z_grid`` and their log-log slope (theory ``-1/(s-p)``)."""
    R = [optimal_two_droplet_separation(m0, m1, z, params) for z in Z_grid]
    slope, icept, misfit = loglog_fit(Z_grid, R)
    return {"Z": list(map(float, Z_grid)), "R": R, "slope": slope, "intercept": icept, "fit_residual": misfit}


# --- splitting ---------------------------------------------------------------


def split_gap(M: float, params: ModelParams, energy=None, grid: int = 2001) -> float:
    """``min_{0<m<M} [e(m) + e(M-m)] - e(M)``: negative iff some two-way split
    beats the single ball."""
    e = energy or (lambda m: e0_ball(m, params))
    ms = M * 0.5 * np.geomspace(1e-7, 1.0, grid)
    h = e(ms) + e(M - ms)
    k = int(np.argmin(h))
    lo, hi = ms[max(k - 1, 0)], ms[min(k + 1, grid - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda m: e(m) + e(M - m), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * M})
        best = min(float(h[k]), float(res.fun))
    else:
        best = float(h[k])
    return best - float(e(M))


def split_threshold(params: ModelParams, search_interval=None, *, energy=None, rtol: float = 1e-6) -> float:
    """Least mass at which splitting into two balls lowers the ball energy.

    This is a ball-model proxy (an upper bound) for the nonexistence
    threshold of the Gamow problem, not that threshold itself.
    """
    if search_interval is None:
        c = riesz_constants(params.d, float(params.s), float(params.tol))
        mt = (c.C1 / c.C2) ** (params.d / (1 + params.d - params.s))
        search_interval = (0.01 * mt, 100.0 * mt)
    lo, hi = map(float, search_interval)
    g_lo, g_hi = split_gap(lo, params, energy), split_gap(hi, params, energy)
    if not (g_lo >= 0 and g_hi < 0):
        raise BracketError(f"gap does not change sign on [{lo}, {hi}] (g={g_lo:.3g}, {g_hi:.3g})")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if split_gap(mid, params, energy) < 0:
            hi = mid
        else:
            lo = mid
    return hi


def splitting_upper_bound(M: float, Z: float, params: ModelParams, opts=None):
    """Compare one origin ball of mass M with the best two-ball split placed
    at separation ``t = Z^(-1/(s-p))`` along a unit direction."""
    part = minimize_masses(M, 1, params, opts).partition
    if part.size < 2:
        half = 0.5 * M
        part = np.array([half, half])
    b = np.eye(params.d)[:1]
    split = exact_energy_balls(GeneralizedConfig(part, b, Z), params)
    single = exact_energy_balls(GeneralizedConfig([M], np.zeros((0, params.d)), Z), params)
    return {
        "t": separation_scale(Z, params),
        "partition": part.tolist(),
        "split_energy": split.total,
        "single_energy": single.total,
        "difference": float(split.total - single.total),
    }


# --- generalized energies ----------------------------------------------------


def optimal_droplet_mass(params: ModelParams) -> float:
    """Volume minimizing the energy per unit mass ``e0(m)/m``."""
    c = riesz_constants(params.d, float(params.s), float(params.tol))
    d, s = params.d, params.s
    return (c.C1 / (c.C2 * (d - s))) ** (d / (d + 1 - s))


def default_droplet_cap(M: float, params: ModelParams) -> int:
    return int(math.ceil(2.0 * M / optimal_droplet_mass(params))) + 1


def generalized_ball_energy(M: float, params: ModelParams, opts=None, N_max=None, Z=None):
    """Ball-model generalized energy ``e0(m0) - Z V(B0) + sum_{i>=1} e0(m_i)``
    minimized over droplet counts and partitions.  Returns ``(N, PartitionResult)``."""
    Z = params.Z if Z is None else Z
    N_max = default_droplet_cap(M, params) if N_max is None else N_max
    if Z == 0:
        return optimal_droplet_count(M, N_max, params, opts)
    return optimal_droplet_count(M, N_max, params.replace(Z=Z), opts, with_confinement=True)


@dataclass(frozen=True)
class SubadditivityVerdict:
    lhs: float
    rhs: float
    slack: float
    ok: bool

    def __post_init__(self):
        for k in ("lhs", "rhs", "slack"):
            object.__setattr__(self, k, float(getattr(self, k)))
        object.__setattr__(self, "ok", bool(self.ok))

    def to_dict(self) -> dict:
        return asdict(self)


def subadditivity_check(M: float, m_prime: float, params: ModelParams, opts=None, rtol: float = 1e-8):
    """Check ``E_Z(M) <= E_Z(m') + E_0(M - m')`` for the ball-model generalized energies."""
    if not 0 < m_prime < M:
        raise InvalidInputError(f"need 0 < m' < M, got m'={m_prime}, M={M}")
    n1, r1 = generalized_ball_energy(m_prime, params, opts)
    n2, r2 = generalized_ball_energy(M - m_prime, params, opts, Z=0.0)
    cap = max(default_droplet_cap(M, params), n1 + n2 + 1)
    _, r = generalized_ball_energy(M, params, opts, N_max=cap)
    rhs = r1.value + r2.value
    slack = rhs - r.value
    return SubadditivityVerdict(r.value, rhs, slack, slack >= -rtol * abs(r.value))


def ez_to_e0_sweep(M: float, params: ModelParams, Z_grid, opts=None, N_max=None):
    """Ball-model ``e_Z(M)`` along a descending Z grid, ending with the Z = 0 value.

    Rows are ``{"Z", "value", "gap", "bound"}`` with ``gap = e_0 - e_Z`` and
    ``bound = (d omega_d/(d-p) + M) Z``.
    """
    Z_grid = [float(z) for z in Z_grid]
    if any(not z > 0 for z in Z_grid) or any(a <= b for a, b in zip(Z_grid, Z_grid[1:])):
        raise InvalidInputError("Z_grid must be positive and strictly descending")
    N_max = default_droplet_cap(M, params) if N_max is None else N_max
    _, base = optimal_droplet_count(M, N_max, params, opts)
    c = riesz_constants(params.d, float(params.s), float(params.tol))
    const = params.d * c.omega_d / (params.d - params.p) + M
    rows = []
    for z in Z_grid:
        _, r = generalized_ball_energy(M, params, opts, N_max=N_max, Z=z)
        rows.append({"Z": z, "value": float(r.value), "gap": float(base.value - r.value), "bound": const * z})
    rows.append({"Z": 0.0, "value": float(base.value), "gap": 0.0, "bound": 0.0})
    return rows
