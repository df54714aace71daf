"""Brute-force reference computations.

Nothing here calls the quadrature, optimizer or asymptotics code.  The
estimators are deliberately naive (uniform sampling, dense grids, central
differences) so agreement with the main build is meaningful.  Frozen results
live in ``tests/fixtures/oracles.jsonl``; regenerate with

    python -m dropletlab.oracles tests/fixtures/oracles.jsonl
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .errors import DegenerateConfigurationError, DivergentIntegralError, InvalidInputError, StencilError

MIN_SAMPLES = 100_000
_CHUNK = 500_000


@dataclass
class OracleRecord:
    name: str
    inputs: dict
    value: object
    uncertainty: float
    samples: int | None = None
    resolution: float | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "OracleRecord":
        return cls(**json.loads(line))


def _vol(d, r):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


def _in_ball(rng, n, d, r):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (r * rng.random(n) ** (1.0 / d))[:, None]


def _on_sphere(rng, n, d):
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def mc_double_integral(c1, r1, c2, r2, s, samples, seed, estimator="uniform") -> OracleRecord:
    """Monte Carlo estimate of the double integral of ``|x-y|^-s`` over two balls.

    ``uniform`` draws x and y independently and uniformly; its variance is
    infinite when the balls overlap and ``2s >= d``.  ``importance`` draws x
    uniformly and the offset ``w = y - x`` with density proportional to
    ``|w|^-s``, which leaves a bounded indicator as the integrand.
    """
    c1, c2 = np.atleast_1d(np.asarray(c1, float)), np.atleast_1d(np.asarray(c2, float))
    d = c1.size
    if s >= d:
        raise DivergentIntegralError(f"kernel |x-y|^-{s} is not integrable in R^{d}")
    if samples < MIN_SAMPLES:
        raise InvalidInputError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if estimator not in ("uniform", "importance"):
        raise InvalidInputError(f"unknown estimator {estimator!r}")
    rng = np.random.default_rng(seed)
    v1, v2 = _vol(d, r1), _vol(d, r2)
    L = float(np.linalg.norm(c1 - c2)) + r1 + r2
    mass = d * _vol(d, 1.0) * L ** (d - s) / (d - s)
    total = total2 = 0.0
    left = samples
    while left:
        n = min(left, _CHUNK)
        x = c1 + _in_ball(rng, n, d, r1)
        if estimator == "uniform":
            y = c2 + _in_ball(rng, n, d, r2)
            f = v1 * v2 * np.linalg.norm(x - y, axis=1) ** (-s)
        else:
            w = _on_sphere(rng, n, d) * (L * rng.random(n) ** (1.0 / (d - s)))[:, None]
            f = v1 * mass * (np.linalg.norm(x + w - c2, axis=1) < r2)
        total += f.sum()
        total2 += (f * f).sum()
        left -= n
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0)
    se = math.sqrt(var / (samples - 1))
    inputs = {"c1": c1.tolist(), "r1": r1, "c2": c2.tolist(), "r2": r2, "s": s, "estimator": estimator}
    return OracleRecord("mc_double_integral", inputs, float(mean), max(se, 1e-300), samples=samples, seed=seed)


def mc_potential_integral(c, r, p, samples, seed) -> OracleRecord:
    """Monte Carlo estimate of the integral of ``|x|^-p`` over a ball."""
    c = np.atleast_1d(np.asarray(c, float))
    d = c.size
    if samples < MIN_SAMPLES:
        raise InvalidInputError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    rng = np.random.default_rng(seed)
    v = _vol(d, r)
    total = total2 = 0.0
    left = samples
    while left:
        n = min(left, _CHUNK)
        f = v * np.linalg.norm(c + _in_ball(rng, n, d, r), axis=1) ** (-p)
        total += f.sum()
        total2 += (f * f).sum()
        left -= n
    mean = total / samples
    se = math.sqrt(max(total2 / samples - mean * mean, 0.0) / (samples - 1))
    return OracleRecord("mc_potential_integral", {"c": c.tolist(), "r": r, "p": p}, float(mean), se,
                        samples=samples, seed=seed)


def grid_minimize_1d(f, interval, resolution=1001, log=False, name="grid_minimize_1d", inputs=None) -> OracleRecord:
    """Dense grid search followed by golden-section refinement around the best node."""
    a, b = map(float, interval)
    if not a < b or resolution < 1000:
        raise InvalidInputError("need a < b and resolution >= 1000")
    xs = np.geomspace(a, b, resolution) if log else np.linspace(a, b, resolution)
    fs = np.array([f(x) for x in xs])
    k = int(np.argmin(fs))
    x, fx = float(xs[k]), float(fs[k])
    step = float(np.max(np.diff(xs[max(k - 1, 0):k + 2])))
    if 0 < k < resolution - 1:
        res = optimize.minimize_scalar(f, bracket=(xs[k - 1], xs[k], xs[k + 1]), method="golden",
                                       options={"xtol": 1e-12})
        if res.fun <= fx and xs[k - 1] <= res.x <= xs[k + 1]:
            x, fx = float(res.x), float(res.fun)
    return OracleRecord(name, inputs or {"interval": [a, b]}, x, step, resolution=step,
                        extra={"fmin": fx, "grid_size": resolution})


def finite_difference_gradient(f, point, step) -> OracleRecord:
    """Central differences in every coordinate of ``point``."""
    if not step > 0:
        raise InvalidInputError(f"step must be > 0, got {step}")
    x0 = np.asarray(point, dtype=float)
    g = np.empty(x0.size)
    flat = x0.ravel()
    for i in range(flat.size):
        vals = []
        for sign in (1.0, -1.0):
            x = flat.copy()
            x[i] += sign * step
            try:
                v = float(f(x.reshape(x0.shape)))
            except (DegenerateConfigurationError, ZeroDivisionError, FloatingPointError) as exc:
                raise StencilError(f"evaluation failed at coordinate {i}: {exc}") from exc
            if not math.isfinite(v):
                raise StencilError(f"non-finite value at coordinate {i}")
            vals.append(v)
        g[i] = (vals[0] - vals[1]) / (2 * step)
    return OracleRecord("finite_difference_gradient", {"point": x0.tolist()}, g.reshape(x0.shape).tolist(),
                        step * step, resolution=step)


# --- naive reference energies (kept apart from the main build) --------------


def pair_energy(masses, points, s, p):
    """``sum_{i != j} m_i m_j |y_i-y_j|^-s - sum_{i>=1} m_i |y_i|^-p`` by explicit loops."""
    m = list(map(float, masses))
    Y = [np.zeros(len(points[0]) if len(points) else 1)] + [np.asarray(y, float) for y in points]
    rep = att = 0.0
    for i in range(len(m)):
        for j in range(len(m)):
            if i != j:
                r = float(np.linalg.norm(Y[i] - Y[j]))
                if r == 0.0:
                    raise DegenerateConfigurationError([(min(i, j), max(i, j))])
                rep += m[i] * m[j] * r ** (-s)
    for i in range(1, len(m)):
        att += m[i] * float(np.linalg.norm(Y[i])) ** (-p)
    return rep - att


def ball_energy(m, d, s, gamma):
    """Perimeter plus self-repulsion of a ball, from a supplied unit-ball constant."""
    om = _vol(d, 1.0)
    r = (m / om) ** (1.0 / d)
    return d * om * r ** (d - 1) + gamma * r ** (2 * d - s)


# --- fixture generation ------------------------------------------------------

FIXTURE_SEED = 20240601


def build_fixture_records() -> list[OracleRecord]:
    """All frozen oracle records.  Deterministic: same code and seeds give
    byte-identical JSON lines."""
    recs = []
    # unit-ball self-energies
    for k, (d, s) in enumerate([(2, 1.0), (3, 1.0), (3, 2.0), (4, 2.0)]):
        r = mc_double_integral(np.zeros(d), 1.0, np.zeros(d), 1.0, s, 2_000_000, FIXTURE_SEED + k, "importance")
        r.name = "gamma_unit_ball"
        r.inputs.update(d=d)
        recs.append(r)
    # separated pairs: far-field consistency and quadrature cross-checks
    pairs = [
        (3, 2.0, [0, 0, 0], 1.0, [10, 0, 0], 1.0),
        (3, 2.0, [0, 0, 0], 0.62035, [1.5, 0.3, 0], 0.5),
        (2, 1.0, [0, 0], 1.0, [2.5, 0], 0.7),
        (3, 1.0, [0, 0, 0], 0.9, [0, 2.2, 0.4], 1.1),
    ]
    for k, (d, s, c1, r1, c2, r2) in enumerate(pairs):
        r = mc_double_integral(c1, r1, c2, r2, s, 1_000_000, FIXTURE_SEED + 100 + k)
        r.name = "cross_double_integral"
        r.inputs.update(d=d)
        recs.append(r)
    # confinement of displaced balls
    for k, (c, rad, p) in enumerate([([0.5, 0, 0], 1.0, 1.0), ([3.0, 0, 0], 1.0, 0.5), ([0.2, 0.3], 0.8, 1.2)]):
        r = mc_potential_integral(c, rad, p, 1_000_000, FIXTURE_SEED + 200 + k)
        r.name = "confinement_integral"
        recs.append(r)
    # two-body optimum by dense search
    for d, s, p, m0, m1 in [(3, 2.0, 1.0, 1.0, 1.0), (3, 2.0, 1.0, 2.0, 1.0), (2, 1.5, 0.5, 1.0, 1.0)]:
        rec = grid_minimize_1d(lambda t: pair_energy([m0, m1], [[t] + [0.0] * (d - 1)], s, p),
                               (0.1, 100.0), resolution=20001, log=True, name="two_body_argmin",
                               inputs={"d": d, "s": s, "p": p, "m0": m0, "m1": m1})
        recs.append(rec)
    # sign table of the two-ball split gap, (d, s) = (3, 2), gamma = 4 pi^2
    gamma = 4 * math.pi**2
    table = []
    for M in np.geomspace(0.05, 20.0, 41):
        ms = M * 0.5 * np.geomspace(1e-7, 1.0, 4001)
        gap = float(np.min(ball_energy(ms, 3, 2.0, gamma) + ball_energy(M - ms, 3, 2.0, gamma))
                    - ball_energy(M, 3, 2.0, gamma))
        table.append([float(M), gap])
    sign_change = next(i for i, (_, g) in enumerate(table) if g < 0)
    recs.append(OracleRecord("split_gap_sign_table", {"d": 3, "s": 2.0, "gamma": gamma},
                             [table[sign_change - 1][0], table[sign_change][0]], 0.0,
                             resolution=4001, extra={"table": table}))
    # finite-difference gradients on seeded random configurations
    rng = np.random.default_rng(FIXTURE_SEED + 300)
    for k in range(6):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(1, 6))
        s = float(rng.uniform(0.3, d - 0.1))
        p = float(rng.uniform(0.05, s - 0.05))
        masses = rng.uniform(0.2, 3.0, n + 1)
        pts = rng.normal(size=(n, d)) * 3.0
        rec = finite_difference_gradient(lambda y: pair_energy(masses, y, s, p), pts, 1e-5)
        rec.inputs.update(d=d, s=s, p=p, masses=masses.tolist())
        recs.append(rec)
    return recs


REQUIRED = {
    "gamma_unit_ball": 4,
    "cross_double_integral": 4,
    "confinement_integral": 3,
    "two_body_argmin": 3,
    "split_gap_sign_table": 1,
    "finite_difference_gradient": 6,
}


def write_fixtures(path) -> list[OracleRecord]:
    recs = build_fixture_records()
    with open(path, "w") as fh:
        for r in recs:
            fh.write(r.to_json() + "\n")
    return recs


def read_fixtures(path) -> list[OracleRecord]:
    with open(path) as fh:
        return [OracleRecord.from_json(line) for line in fh if line.strip()]


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/oracles.jsonl")
