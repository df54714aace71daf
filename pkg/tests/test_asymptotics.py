import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dropletlab import (
    BracketError,
    GeneralizedConfig,
    InvalidConfigurationError,
    InvalidInputError,
    ModelParams,
    OptimizerOptions,
    e0_ball,
    exact_energy_balls,
    expansion_residual_sweep,
    ez_to_e0_sweep,
    inflection_mass,
    optimal_droplet_count,
    predicted_energy,
    riesz_constants,
    separation_scale,
    split_threshold,
    subadditivity_check,
    two_body_optimum,
    unit_ball_volume,
)
from dropletlab.asymptotics import (
    CSV_HEADER,
    far_field_bound,
    separation_scaling_sweep,
    split_gap,
    splitting_upper_bound,
)
from dropletlab.oracles import read_fixtures

FIXTURES = read_fixtures(__file__.replace("test_asymptotics.py", "fixtures/oracles.jsonl"))
W3 = unit_ball_volume(3)
ZGRID = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
FAST = OptimizerOptions(starts=3, seed=1)


def test_separation_scale(p321):
    assert separation_scale(1.0, p321) == 1.0
    assert separation_scale(1e-4, p321) == pytest.approx(1e4, rel=1e-12)
    assert separation_scale(1e-4, ModelParams(4, 3.0, 1.0)) == pytest.approx(1e2, rel=1e-12)
    with pytest.raises(InvalidInputError):
        separation_scale(0.0, p321)


@given(st.floats(1e-6, 1.0), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_physical_centers_rescale(Z, y):
    params = ModelParams(3, 2.0, 1.0)
    gc = GeneralizedConfig([1.0, 1.0], [y], Z)
    x = gc.physical_centers(params)
    assert np.array_equal(x[0], np.zeros(3))
    assert np.allclose(x[1] * Z ** (1 / (params.s - params.p)), y, rtol=1e-14, atol=1e-300)


def test_single_ball_energies(p321):
    gc = GeneralizedConfig([2.0], np.zeros((0, 3)), 0.0)
    assert exact_energy_balls(gc, p321).total == pytest.approx(e0_ball(2.0, p321), rel=1e-15)
    gc1 = GeneralizedConfig([W3], np.zeros((0, 3)), 1.0)
    assert exact_energy_balls(gc1, p321).total == pytest.approx(e0_ball(W3, p321) - 2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("Z", [0.0, 1e-3, 0.5, 3.0])
def test_expansion_exact_for_one_ball(p321, Z):
    gc = GeneralizedConfig([1.7], np.zeros((0, 3)), Z)
    assert exact_energy_balls(gc, p321).total == predicted_energy(gc, p321)


def test_two_separated_balls(p321):
    r = (1.0 / W3) ** (1 / 3)
    R = 10 * 2 * r
    gc = GeneralizedConfig([1.0, 1.0], [[R, 0, 0]], 1.0)
    br = exact_energy_balls(gc, p321)
    isolated = 2 * e0_ball(1.0, p321)
    interacting = br.perimeter + br.riesz
    assert interacting >= isolated
    assert interacting - isolated <= 2 * (R**-2 + far_field_bound(gc, p321))
    assert br.error_estimate >= 0


def test_overlap_rejected(p321):
    gc = GeneralizedConfig([1.0, 1.0], [[0.5, 0, 0]], 1.0)
    with pytest.raises(InvalidConfigurationError) as exc:
        exact_energy_balls(gc, p321)
    assert exc.value.Z == 1.0


def test_predicted_energy(p321):
    m = np.array([1.0, 1.0])
    assert predicted_energy(GeneralizedConfig(m, [[4, 0, 0]], 0.0), p321) == pytest.approx(2 * e0_ball(1.0, p321))
    Z = 1e-3
    gc = GeneralizedConfig(m, [[4, 0, 0]], Z)
    r0 = (1.0 / W3) ** (1 / 3)
    V0 = 3 * W3 * r0**2 / 2
    assert predicted_energy(gc, p321) == pytest.approx(2 * e0_ball(1.0, p321) - Z * V0 + Z**2 * -0.125, rel=1e-14)


def test_residual_sweep_single_ball(p321):
    sw = expansion_residual_sweep([2.0], np.zeros((0, 3)), p321, ZGRID)
    assert sw.exact_match and sw.slope is None
    assert all(r.residual == 0.0 for r in sw.reports)


@pytest.mark.parametrize("params", [ModelParams(3, 2.0, 1.0), ModelParams(2, 1.5, 0.5)], ids=["3-2-1", "2-1.5-0.5"])
def test_residual_sweep_order(params):
    # balls are centrally symmetric, so the R^-(s+1) correction cancels and
    # the residual decays with exponent (s+2)/(s-p)
    r, _ = two_body_optimum(1.0, 1.0, params)
    y = np.zeros((1, params.d))
    y[0, 0] = r
    sw = expansion_residual_sweep([1.0, 1.0], y, params, ZGRID)
    expected = (params.s + 2) / (params.s - params.p)
    assert sw.slope == pytest.approx(expected, abs=0.05)
    assert sw.slope >= (params.s + 1) / (params.s - params.p)
    for rep in sw.reports:
        assert abs(rep.residual) <= rep.bound
        assert rep.exact - rep.predicted == pytest.approx(rep.residual, abs=1e-12 * abs(rep.exact))


def test_residual_sweep_overlap_names_Z(p321):
    with pytest.raises(InvalidConfigurationError) as exc:
        expansion_residual_sweep([1.0, 1.0], [[0.05, 0, 0]], p321, [1.0, 1e-4])
    assert exc.value.Z == 1.0 and "Z=1.0" in str(exc.value)


def test_sweep_serialization(p321):
    sw = expansion_residual_sweep([1.0, 1.0], [[4.0, 0, 0]], p321, [1e-2, 1e-3])
    lines = sw.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "Z,exact,predicted,residual"
    assert len(lines) == 3
    d = sw.to_dict()
    assert set(d) == {"reports", "slope", "intercept", "fit_residual", "exact_match"}


def test_separation_scaling(p321):
    out = separation_scaling_sweep(1.0, 1.0, p321, [1e-2, 1e-3, 1e-4])
    assert out["slope"] == pytest.approx(-1.0, abs=1e-3)
    assert out["R"][-1] == pytest.approx(4.0 * 1e4, rel=1e-3)


def test_split_gap_signs(p321):
    th = split_threshold(p321)
    assert split_gap(0.5 * inflection_mass(p321), p321) >= 0
    assert split_gap(2 * th, p321) < 0
    assert split_gap(0.999 * th, p321) >= 0


def test_split_threshold_against_sign_table(p321):
    rec = next(r for r in FIXTURES if r.name == "split_gap_sign_table")
    lo, hi = rec.value
    assert lo <= split_threshold(p321) <= hi


def test_split_threshold_comparative_statics(p321):
    c = riesz_constants(3, 2.0)
    base = split_threshold(p321)
    doubled = split_threshold(p321, energy=lambda m: 2 * c.C1 * m ** (2 / 3) + c.C2 * m ** (4 / 3),
                              search_interval=(0.01, 100.0))
    assert doubled > base
    # homogeneity fixes the factor: thresholds scale as C1^(d/(1+d-s))
    assert doubled / base == pytest.approx(2**1.5, rel=1e-5)


def test_split_threshold_bracket_error(p321):
    with pytest.raises(BracketError):
        split_threshold(p321, (0.01, 0.02))


def test_splitting_beats_single_ball(p321):
    th = split_threshold(p321)
    out = splitting_upper_bound(4 * th, 1e-3, p321)
    assert out["difference"] < 0 and out["t"] == pytest.approx(1e3)


def test_subadditivity_half_split(p321):
    v = subadditivity_check(2.0, 1.0, p321.replace(Z=0.2), FAST)
    assert v.slack >= 0 and v.ok


def test_subadditivity_limit(p321):
    params = p321.replace(Z=0.2)
    slacks = [subadditivity_check(2.0, 2.0 * (1 - eps), params, FAST).slack for eps in (1e-2, 1e-4, 1e-6)]
    assert all(s >= -1e-8 for s in slacks)
    assert slacks[-1] < slacks[0] and slacks[-1] < 1e-2


def test_subadditivity_rejects_bad_split(p321):
    with pytest.raises(InvalidInputError):
        subadditivity_check(1.0, 1.0, p321)


def test_ez_to_e0(p321):
    M = 2.0
    grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    rows = ez_to_e0_sweep(M, p321, grid, FAST)
    const = 3 * W3 / (3 - 1.0) + M
    gaps = [r["gap"] for r in rows]
    for r in rows[:-1]:
        assert 0 <= r["gap"] <= const * r["Z"]
    assert np.all(np.diff(gaps) <= 0)
    _, base = optimal_droplet_count(M, 6, p321, FAST)
    assert rows[-1]["Z"] == 0.0 and rows[-1]["value"] == base.value
    with pytest.raises(InvalidInputError):
        ez_to_e0_sweep(M, p321, [1e-3, 1e-2])
