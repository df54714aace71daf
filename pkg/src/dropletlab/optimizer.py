"""Minimizers for droplet positions and for the mass split between droplets.

``minimize_config`` runs multistart L-BFGS with Armijo backtracking on the
discrete interaction energy.  Trial steps that make two points collide are
rejected and the step is shrunk; the kernel is never smoothed.

``minimize_masses`` minimizes ``sum_i e0(m_i)`` over the simplex by projected
gradient descent, then polishes the active droplets with Newton steps on the
equal-multiplier (KKT) system and sweeps the boundary for droplet removal.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateConfigurationError, InvalidInputError, OptimizationFailedError
from .interaction import check_masses, f_energy, f_gradient
from .model import (
    ModelParams,
    e0_ball,
    e0_second_derivative,
    multiplier_ball,
    unit_ball_volume,
)
from .rng import derive_rng, uniform_on_sphere


@dataclass(frozen=True)
class OptimizerOptions:
    starts: int = 8
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-9
    step_shrink: float = 0.5
    seed: int = 0
    armijo: float = 1e-4
    escape_factor: float = 10.0
    memory: int = 10

    def __post_init__(self):
        if self.starts < 1:
            raise InvalidInputError("starts must be >= 1")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not self.gradient_tolerance > 0:
            raise InvalidInputError("gradient_tolerance must be > 0")
        if not 0 < self.step_shrink < 1:
            raise InvalidInputError("step_shrink must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConfigResult:
    points: np.ndarray
    value: float
    gradient_norm: float
    converged: bool
    starts_used: int
    masses: np.ndarray = field(repr=False, default=None)
    initial_values: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "distances": np.linalg.norm(self.points, axis=1).tolist(),
            "value": float(self.value),
            "gradient_norm": float(self.gradient_norm),
            "converged": bool(self.converged),
            "starts_used": self.starts_used,
            "masses": None if self.masses is None else self.masses.tolist(),
        }


@dataclass
class PartitionResult:
    partition: np.ndarray
    value: float
    multipliers: np.ndarray
    N: int
    interior: bool

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "interior", bool(self.interior))

    def to_dict(self) -> dict:
        return {
            "partition": self.partition.tolist(),
            "value": self.value,
            "multipliers": self.multipliers.tolist(),
            "N": self.N,
            "interior": self.interior,
        }


def initial_radius(masses, params: ModelParams) -> float:
    """Two-body optimal distance for the heaviest droplet: the natural start scale."""
    s, p = params.s, params.p
    return (2.0 * s * float(np.max(masses)) / p) ** (1.0 / (s - p))


def escape_radius(masses, params: ModelParams, factor: float = 10.0) -> float:
    """Distance beyond which a start is treated as escaping: ``factor`` times the
    two-body radius computed with the total mass, which bounds the spread of
    many-droplet equilibria better than the heaviest single mass does."""
    s, p = params.s, params.p
    return factor * (2.0 * s * float(np.sum(masses)) / p) ** (1.0 / (s - p))


class _ScaledObjective:
    """``F(y) / F0`` in per-droplet units ``z_i = y_i / c_i``.

    With small ``s - p`` the natural pair distance ``(2 s m0 / p)^(1/(s-p))``
    varies over many decades between droplets, so one global length scale
    leaves the problem badly conditioned.  Scaling each droplet by its own
    distance from the anchor makes relative moves comparable.
    """

    def __init__(self, masses, params, c, F0, r_escape):
        self.m, self.params, self.F0, self.r_escape = masses, params, F0, r_escape
        self.c = np.asarray(c, dtype=float)[:, None]

    def points(self, z):
        return self.c * z.reshape(self.c.shape[0], -1)

    def value(self, z):
        try:
            return f_energy(self.m, self.points(z), self.params).total / self.F0
        except DegenerateConfigurationError:
            return math.inf

    def grad(self, z):
        g = f_gradient(self.m, self.points(z), self.params)
        return (g * self.c).ravel() / self.F0

    def escaped(self, z):
        return float(np.max(np.linalg.norm(self.points(z), axis=1))) > self.r_escape


def _lbfgs(obj, z0, opts, tol, max_iter):
    """Limited-memory BFGS with Armijo backtracking on a scaled objective.

    Returns (z, value, gradient_norm, status, iterations)."""
    x = z0.ravel().copy()
    fx = obj.value(x)
    g = obj.grad(x)
    S, Y = [], []
    eps_f = 8 * np.finfo(float).eps
    for it in range(max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return x, fx, gnorm, "converged", it
        q = g.copy()
        alphas = []
        for s_k, y_k in reversed(list(zip(S, Y))):
            rho = 1.0 / (y_k @ s_k)
            a = rho * (s_k @ q)
            alphas.append((rho, a))
            q -= a * y_k
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        else:
            q *= 0.1 / max(gnorm, 1e-300)
        for (s_k, y_k), (rho, a) in zip(zip(S, Y), reversed(alphas)):
            b = rho * (y_k @ q)
            q += (a - b) * s_k
        direction = -q
        slope = g @ direction
        if not slope < 0:
            S.clear()
            Y.clear()
            direction = -g * (0.1 / gnorm)
            slope = g @ direction
        step = 1.0
        accepted = False
        for _ in range(60):
            x_new = x + step * direction
            f_new = obj.value(x_new)
            # near a minimum the change in f drops below roundoff; a step that
            # does not increase f beyond that level is still taken
            if f_new <= fx + opts.armijo * step * slope or (
                math.isfinite(f_new) and f_new <= fx + eps_f * abs(fx)
            ):
                accepted = True
                break
            step *= opts.step_shrink
        if not accepted:
            return x, fx, gnorm, "stalled", it
        g_new = obj.grad(x_new)
        s_k, y_k = x_new - x, g_new - g
        if y_k @ s_k > 1e-14 * np.linalg.norm(s_k) * np.linalg.norm(y_k):
            S.append(s_k)
            Y.append(y_k)
            if len(S) > opts.memory:
                S.pop(0)
                Y.pop(0)
        x, fx, g = x_new, f_new, g_new
        if obj.escaped(x):
            return x, fx, float(np.linalg.norm(g)), "escaped", it + 1
    return x, fx, float(np.linalg.norm(g)), "max_iterations", max_iter


_RESCALE_EVERY = 200
# dimensionless stationarity: |c_i dF/dy_i| / |F|.  Far, weakly coupled
# droplets carry a vanishing share of F, and resolving their gradient much
# below this level would need energy differences under machine precision.
_RELATIVE_TOL = 1e-7


def _descend(m, x0, params, opts, r_escape):
    """Local minimization from ``x0`` with per-droplet rescaling restarts.

    Returns (x, status).  Convergence means the scaled gradient is below
    ``min(relative tolerance, gradient_tolerance * min_i |y_i| / |F|)``, which
    also bounds the physical gradient by ``gradient_tolerance``.
    """
    x = x0
    used = 0
    stalls = 0
    while used < opts.max_iterations:
        c = np.linalg.norm(x, axis=1)
        F0 = abs(f_energy(m, x, params).total)
        obj = _ScaledObjective(m, params, c, F0, r_escape)
        tol = min(_RELATIVE_TOL, opts.gradient_tolerance * float(np.min(c)) / F0)
        budget = min(_RESCALE_EVERY, opts.max_iterations - used)
        z, _, _, status, it = _lbfgs(obj, x / c[:, None], opts, tol, budget)
        used += max(it, 1)
        x_new = obj.points(z)
        if status in ("converged", "escaped"):
            return x_new, status
        moved = not np.array_equal(x_new, x)
        x = x_new
        if status == "stalled" or not moved:
            stalls += 1
            if stalls >= 2:
                return x, "stalled"
        else:
            stalls = 0
    return x, "max_iterations"


def minimize_config(masses, params: ModelParams, opts: OptimizerOptions | None = None) -> ConfigResult:
    """Minimize the interaction energy over configurations with the anchor at 0.

    Each start draws points uniformly on the sphere of the two-body radius,
    jittered radially by +-50%, and is then dilated by the exactly optimal
    factor, so every start already has negative energy.  Descent is
    quasi-Newton with each droplet measured in units of its own distance from
    the anchor.  The best start wins (lowest value, then lowest start index);
    a best value that is not negative is flagged not converged.
    """
    opts = opts or OptimizerOptions()
    m = check_masses(masses)
    N = m.size - 1
    if N < 1:
        raise InvalidInputError("minimize_config needs at least one movable droplet (N >= 1)")
    d = params.d
    s, p = params.s, params.p
    r_init = initial_radius(m, params)
    r_escape = escape_radius(m, params, opts.escape_factor)
    runs = []
    initial_values = []
    for k in range(opts.starts):
        rng = derive_rng(opts.seed, "minimize_config", k)
        radii = r_init * rng.uniform(0.5, 1.5, N)
        x0 = uniform_on_sphere(rng, N, d) * radii[:, None]
        try:
            parts = f_energy(m, x0, params)
        except DegenerateConfigurationError:
            initial_values.append(math.inf)
            continue
        # exact optimal dilation of the start: F(lam x0) = lam^-s A - lam^-p B
        lam = (s * parts.repulsion / (p * parts.attraction)) ** (1.0 / (s - p))
        x0 = lam * x0
        initial_values.append(f_energy(m, x0, params).total)
        x, status = _descend(m, x0, params, opts, r_escape)
        if status == "escaped":
            continue
        runs.append((status == "converged", f_energy(m, x, params).total, k, x))
    if not runs:
        raise OptimizationFailedError(
            "every start was degenerate or escaped",
            {"starts": opts.starts, "r_init": r_init, "initial_values": initial_values},
        )
    conv = [r for r in runs if r[0]] or runs
    ok, _, _, x = min(conv, key=lambda r: (r[1], r[2]))
    fx = f_energy(m, x, params).total
    gnorm = float(np.linalg.norm(f_gradient(m, x, params)))
    return ConfigResult(
        points=x,
        value=float(fx),
        gradient_norm=gnorm,
        converged=bool(ok and fx < 0),
        starts_used=opts.starts,
        masses=m,
        initial_values=initial_values,
    )


# --- mass partitions -------------------------------------------------------


def _confinement_coeff(params: ModelParams) -> float:
    # V(B_r(0)) = K m^((d-p)/d) for an origin-centered ball of volume m
    d, p = params.d, params.p
    w = unit_ball_volume(d)
    return d * w * w ** (-(d - p) / d) / (d - p)


class _PartitionObjective:
    """sum_i e0(m_i), minus Z V(B(m_0)) for the anchor when confined."""

    def __init__(self, params: ModelParams, with_confinement: bool):
        self.params = params
        self.zk = params.Z * _confinement_coeff(params) if with_confinement else 0.0
        self.q = (params.d - params.p) / params.d

    def value(self, m):
        v = float(np.sum(e0_ball(m, self.params)))
        if self.zk:
            v -= self.zk * m[0] ** self.q
        return v

    def grad(self, m, idx=None):
        """Gradient restricted to the droplets ``idx`` (all by default)."""
        idx = np.arange(m.size) if idx is None else np.asarray(idx)
        g = np.asarray(multiplier_ball(m[idx], self.params), dtype=float).reshape(-1).copy()
        if self.zk and idx[0] == 0:
            g[0] -= self.zk * self.q * m[0] ** (self.q - 1)
        return g

    def hess_diag(self, m, idx):
        idx = np.asarray(idx)
        h = np.asarray(e0_second_derivative(m[idx], self.params), dtype=float).reshape(-1).copy()
        if self.zk and idx[0] == 0:
            h[0] -= self.zk * self.q * (self.q - 1) * m[0] ** (self.q - 2)
        return h


def project_simplex(v, total, floor=0.0):
    """Euclidean projection onto ``{x : x_i >= floor, sum x = total}``."""
    v = np.asarray(v, dtype=float)
    n = v.size
    budget = total - n * floor
    if budget < 0:
        raise InvalidInputError("floor too large for the simplex total")
    w = v - floor
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - budget
    idx = np.arange(1, n + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(w - theta, 0.0) + floor


def _projected_gradient(obj, m0, total, floor, opts):
    m = project_simplex(m0, total, floor)
    f = obj.value(m)
    step = total / max(np.max(np.abs(obj.grad(m))), 1e-300) * 0.1
    for _ in range(opts.max_iterations):
        g = obj.grad(m)
        accepted = False
        for _ in range(60):
            trial = project_simplex(m - step * g, total, floor)
            f_trial = obj.value(trial)
            if f_trial <= f + opts.armijo * (g @ (trial - m)):
                accepted = True
                break
            step *= opts.step_shrink
        if not accepted:
            break
        moved = float(np.max(np.abs(trial - m)))
        ds, dg = trial - m, obj.grad(trial) - g
        m, f = trial, f_trial
        if moved <= 1e-13 * total:
            break
        # Barzilai-Borwein step; plain growth zigzags on ill-conditioned splits
        sy = float(ds @ dg)
        step = float(ds @ ds) / sy if sy > 0 else step / opts.step_shrink
    return m


def _newton_polish(obj, m, free, total_free, iters=60):
    """Newton steps on the KKT system ``grad_i = lambda`` for the free droplets,
    keeping their sum fixed.  Steps that would leave the positive orthant or
    raise the objective are damped."""
    m = m.copy()
    for _ in range(iters):
        g = obj.grad(m, free)
        h = obj.hess_diag(m, free)
        spread = np.max(g) - np.min(g)
        if spread <= 1e-14 * np.max(np.abs(g)):
            break
        if np.any(np.abs(h) < 1e-300):
            break
        lam = -np.sum(g / h) / np.sum(1.0 / h)
        dx = -(g + lam) / h
        f0 = obj.value(m)
        t = 1.0
        while t > 1e-8:
            trial = m.copy()
            trial[free] = m[free] + t * dx
            if np.all(trial[free] > 0) and obj.value(trial) <= f0 + 1e-14 * abs(f0):
                break
            t *= 0.5
        else:
            break
        m = trial
        m[free] *= total_free / m[free].sum()
    return m


def _polished_candidate(obj, m, keep, total):
    """Drop droplets not in ``keep``, rebalance the mass, and polish.

    At most one droplet may sit in the strictly concave range of its energy
    (below the inflection mass of e0): two such droplets can always merge
    profitably, so extras are folded into a neighbour and the candidate is
    re-polished.
    """
    idx = np.array(sorted(keep))
    mm = np.zeros_like(m)
    mm[idx] = m[idx] * total / m[idx].sum()
    while True:
        mm = _newton_polish(obj, mm, idx, total)
        concave = obj.hess_diag(mm, idx) < 0
        small = [i for i, c in zip(idx, concave) if c]
        if len(small) < 2:
            return mm, idx
        # the anchor (index 0) is never removed
        victim = min((i for i in small if i != 0), key=lambda i: mm[i])
        others = [i for i in small if i != victim]
        target = max(others, key=lambda i: mm[i])
        mm[target] += mm[victim]
        mm[victim] = 0.0
        idx = idx[idx != victim]


def minimize_masses(
    M: float,
    N: int,
    params: ModelParams,
    opts: OptimizerOptions | None = None,
    *,
    with_confinement: bool = False,
) -> PartitionResult:
    """Best split of total mass ``M`` among ``N + 1`` balls (index 0 is the anchor).

    Minimizes ``sum_i e0(m_i)``; with ``with_confinement`` the anchor ball also
    gains ``-Z V(B(m_0))``.  Droplets driven to zero are removed, so the
    returned partition can be shorter than ``N + 1``; all returned masses are
    strictly positive and sum to ``M``.
    """
    opts = opts or OptimizerOptions()
    if not M > 0:
        raise InvalidInputError(f"M must be > 0, got {M}")
    if N < 0 or int(N) != N:
        raise InvalidInputError(f"N must be a nonnegative integer, got {N}")
    N = int(N)
    obj = _PartitionObjective(params, with_confinement)
    n = N + 1
    if n == 1:
        m = np.array([float(M)])
        return PartitionResult(m, obj.value(m), obj.grad(m), 0, True)
    floor = 1e-9 * M
    rng = derive_rng(opts.seed, "minimize_masses", N)

    starts = [np.full(n, M / n)]
    for k in range(1, n):
        s0 = np.full(n, floor)
        s0[:k] = (M - (n - k) * floor) / k
        starts.append(s0)
    starts.extend(rng.dirichlet(np.ones(n), size=opts.starts) * M)

    best = None
    for s0 in starts:
        m = _projected_gradient(obj, s0, M, floor, opts)
        if not with_confinement:
            m = np.sort(m)[::-1]
        active = [i for i in range(n) if m[i] > 10 * floor or i == 0]
        cands = [_polished_candidate(obj, m, active, M)]
        if len(active) == n:
            cands.append(_polished_candidate(obj, m, range(n), M))
        for mm, idx in cands:
            v = obj.value(mm[idx])
            if best is None or v < best[0] - 1e-13 * abs(best[0]):
                best = (v, mm[idx].copy(), len(idx) == n)

    _, part, interior = best
    part = part * (M / part.sum())
    return PartitionResult(part, obj.value(part), obj.grad(part), N, interior)


def optimal_droplet_count(
    M: float,
    N_max: int,
    params: ModelParams,
    opts: OptimizerOptions | None = None,
    *,
    with_confinement: bool = False,
):
    """Minimize over ``N in 0..N_max``; ties go to the smaller N.

    Returns ``(N_star, PartitionResult)`` where ``N_star + 1`` is the number of
    droplets actually used.
    """
    if N_max < 0:
        raise InvalidInputError(f"N_max must be >= 0, got {N_max}")
    best = None
    for N in range(int(N_max) + 1):
        res = minimize_masses(M, N, params, opts, with_confinement=with_confinement)
        if best is None or res.value < best.value - 1e-12 * abs(best.value):
            best = res
    return len(best.partition) - 1, best
