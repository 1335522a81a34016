import json

import numpy as np
import pytest

from ergodic_schrodinger.measure import (
    EnergyGrid, approximation_experiment, coupling_integral, coupling_nodes, default_threshold,
    estimate_M, weighted_gap_integral,
)
from ergodic_schrodinger.potentials import Scaled, StepFunction, constant, cosine, perturb

FAST = dict(N=2000, orbits=4)


def test_grid_geometry():
    g = EnergyGrid.for_bound(1.0, 6)
    assert g.lo == -3.0 and g.hi == 3.0
    assert g.spacing == 1.0
    np.testing.assert_allclose(g.nodes, [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])
    with pytest.raises(ValueError):
        EnergyGrid(1.0, 0.0, 4)


def test_default_threshold():
    assert default_threshold([0.001, 0.002, 0.003]) == 0.05
    assert default_threshold([0.02, 0.03, np.nan]) == pytest.approx(0.125)


@pytest.mark.parametrize("c", [0.0, 1.0, -2.5])
def test_constant_potential_zero_set_is_a_shifted_band(c):
    # gamma vanishes exactly on [c - 2, c + 2]
    grid = EnergyGrid(c - 3.0, c + 3.0, 60)
    est = estimate_M(constant(c), grid, 0.05, N=10**4, orbits=2)
    inside = np.abs(grid.nodes - c) < 2.0
    outside = np.abs(grid.nodes - c) > 2.3
    assert np.all(est.below[inside])
    assert not np.any(est.below[outside])
    assert est.value == pytest.approx(4.0, abs=2 * grid.spacing)


def test_large_coupling_has_no_zero_set():
    est = estimate_M(Scaled(cosine(), 3.0), count=40, delta_gamma=0.1, **FAST)
    assert est.value == 0.0
    assert np.nanmin(est.gamma) > np.log(3.0) - 0.05


def test_threshold_recount_is_monotone():
    est = estimate_M(cosine(), count=60, delta_gamma=0.05, **FAST)
    values = [est.with_threshold(d).value for d in (0.01, 0.05, 0.2, 1.0)]
    assert values == sorted(values)
    assert est.with_threshold(0.05).value == est.value


def test_grid_must_stay_near_interval():
    with pytest.raises(ValueError):
        estimate_M(constant(0.0), EnergyGrid(-10.0, 10.0, 10), **FAST)


def test_measure_table_and_dict():
    est = estimate_M(constant(0.0), count=8, delta_gamma=0.05, **FAST)
    lines = est.table("demo").splitlines()
    assert lines[0] == "# demo" and lines[1] == "E,gamma,std_error,below"
    assert len(lines) == 10
    assert json.loads(json.dumps(est.to_dict()))["grid"]["count"] == 8


def test_weighted_gap_integral_by_hand():
    new = np.array([0.0, 0.5, 1.0])
    ref = np.array([0.2, 0.5, 0.4])
    w = np.array([1.0, 2.0, 3.0])
    assert weighted_gap_integral(new, ref, w, 0.5, "min") == pytest.approx(-0.1)
    assert weighted_gap_integral(new, ref, w, 0.5, "max") == pytest.approx(0.9)
    with pytest.raises(ValueError):
        weighted_gap_integral(new, ref, w[:2], 0.5)


def test_coupling_nodes():
    np.testing.assert_allclose(coupling_nodes(2.0, 4), [0.25, 0.8333333333, 1.4166666667, 2.0])


def test_coupling_integral_free_case():
    # M(0) = 4 at every coupling, so the integral is 4 * Lambda
    total, report = coupling_integral(constant(0.0), 1.0, n_couplings=4, count=40, **FAST)
    assert total == pytest.approx(4.0, abs=0.1)
    assert report.verdicts["within_interval_bound"]
    assert len(report.stages) == 4


def test_approximation_experiment_small():
    s = perturb(StepFunction((0.0, 0.5), (0.0, 1.5)))
    rep = approximation_experiment(s, n_schedule=(16, 64), count=40, horizon=100, **FAST)
    l1 = [st.data["l1"] for st in rep.stages[1:]]
    h = [1 / (n + 4) for n in (16, 64)]
    np.testing.assert_allclose(l1, [3.0 * x / 3 for x in h], rtol=1e-6)
    assert rep.verdicts["nonperiodic"]
    assert rep.verdicts["l1_decreasing_within_bound"]
    assert set(rep.verdicts) == {"nonperiodic", "l1_decreasing_within_bound",
                                 "measure_not_increasing", "step_measure_small"}


def test_approximation_from_continuous_function():
    rep = approximation_experiment(cosine(), k=16, n_schedule=(8, 32), count=20, horizon=50, **FAST)
    assert rep.stages[0].data["sup_error"] <= 4 * np.pi / 32 + 1e-9
    assert rep.inputs["step"]["variant"] == "step"


def test_illegal_stage_is_reported_not_raised():
    s = StepFunction((0.0, 0.5), (0.0, 1.5))
    rep = approximation_experiment(s, n_schedule=(1, 16), n0=0, count=10, horizon=20, **FAST)
    assert "error" in rep.stages[1].data
    assert not rep.verdicts["l1_decreasing_within_bound"]


def test_report_json_is_deterministic():
    s = perturb(StepFunction((0.0, 0.5), (0.0, 1.5)))
    a = approximation_experiment(s, n_schedule=(16, 64), count=20, horizon=50, **FAST)
    b = approximation_experiment(s, n_schedule=(16, 64), count=20, horizon=50, workers=2, **FAST)
    assert a.to_json(timing=False) == b.to_json(timing=False)
    assert "verdict" in a.summary()
