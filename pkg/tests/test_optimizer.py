import math
from fractions import Fraction as F

import numpy as np
import pytest

from densitylab import optimizer
from densitylab.constructions import CmsnParams, build_cmsn
from densitylab.core import make_configuration
from densitylab.optimizer import (
    MIN_INCREMENT,
    THEOREM_FLOOR,
    FloorViolation,
    ParamVector,
    float_delta_star,
    min_table_density,
    neighborhood_audit,
    objective,
    optimal_audit,
    search,
    table_limits,
)
from densitylab.profile import delta_star


def test_param_vector_round_trip():
    C = make_configuration([("1/4", "1/2"), ("3/4", 1)])
    v = ParamVector.from_configuration(C)
    np.testing.assert_allclose(v.coords, [0.25] * 4)
    assert v.to_configuration() == C


def test_param_vector_validation():
    with pytest.raises(ValueError):
        ParamVector(1, np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        ParamVector(2, np.array([1.0, 1.0]))


def test_from_log_floors_increments():
    v = ParamVector.from_log(np.array([0.0, -80.0, 0.0, -90.0]))
    assert np.all(v.coords >= MIN_INCREMENT * 0.999)
    assert abs(v.coords.sum() - 1.0) < 1e-15
    C = v.to_configuration()
    assert C.r == 2 and C.b_r == 1


def test_objective_symmetric():
    v = ParamVector.from_configuration(make_configuration([("1/2", 1)]))
    assert abs(objective(v) - 0.5) < 1e-15


@pytest.mark.parametrize("N", [10, 40])
def test_objective_matches_exact(N):
    C = build_cmsn(CmsnParams.optimal(N))
    assert abs(float_delta_star(C) - float(delta_star(C))) < 1e-9


def test_random_vectors_respect_floor():
    rng = np.random.default_rng(1)
    for _ in range(500):
        r = int(rng.integers(1, 9))
        v = ParamVector.from_log(rng.normal(0, 1.5, 2 * r))
        assert objective(v) >= 0.2629 - 1e-6


def test_single_interval_search_matches_grid_oracle():
    grid = min(delta_star(make_configuration([(F(k, 1000), 1)])) for k in range(1, 1000))
    res = search(1, restarts=3, iters=300, seed=0)
    golden = (math.sqrt(5) - 1) / 4  # optimum of the one-interval family
    assert golden - 1e-12 <= float(res.exact_objective) <= float(grid) + 1e-6
    assert abs(float(res.exact_objective) - golden) < 1e-6


def test_search_reproducible_and_parallel_invariant():
    a = search(3, restarts=3, iters=150, seed=42)
    b = search(3, restarts=3, iters=150, seed=42)
    c = search(3, restarts=3, iters=150, seed=42, workers=2)
    for other in (b, c):
        assert other.exact_objective == a.exact_objective
        assert np.array_equal(other.best_params.coords, a.best_params.coords)
        assert other.trace == a.trace
    assert a.exact_objective >= THEOREM_FLOOR


def test_trace_is_monotone_per_restart():
    res = search(2, restarts=2, iters=200, seed=5)
    for k in range(2):
        inc = [row[2] for row in res.trace if row[0] == k]
        assert len(inc) == 200
        assert all(x >= y for x, y in zip(inc, inc[1:]))


def test_result_is_certified():
    res = search(2, restarts=2, iters=200, seed=8)
    assert delta_star(res.configuration) == res.exact_objective
    assert res.to_json_dict()["objective_gap"] < 1e-6


def test_floor_violation_is_fatal(monkeypatch):
    monkeypatch.setattr(optimizer, "THEOREM_FLOOR", F(49, 100))
    with pytest.raises(FloorViolation):
        search(2, restarts=1, iters=50, seed=0)


def test_precision_incident_is_logged(monkeypatch):
    real = optimizer.objective
    monkeypatch.setattr(optimizer, "objective", lambda v: real(v) - 1e-3)
    res = search(2, restarts=1, iters=30, seed=0)
    assert res.incidents
    assert all(abs(i["float"] - i["exact"]) > 1e-6 for i in res.incidents)


def test_init_with_wrong_r_rejected():
    with pytest.raises(ValueError):
        search(2, 1, 10, 0, init=make_configuration([("1/2", 1)]))
    with pytest.raises(ValueError):
        search(0, 1, 10, 0)


def test_trace_csv(tmp_path):
    res = search(1, restarts=1, iters=5, seed=0)
    path = tmp_path / "trace.csv"
    res.write_trace(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "restart,iteration,incumbent,simplex_best" and len(lines) == 6


# ------------------------------------------------------------------ audit


def test_optimal_limits_agree():
    rep = optimal_audit()
    a, b, c = rep.limits
    assert max(a, b, c) - min(a, b, c) < 1e-9
    assert rep.center_is_max


@pytest.mark.parametrize("dm, ds", [(0.01, 0.0), (0.0, -0.01), (-0.01, 0.0), (0.0, 0.01)])
def test_perturbation_lowers_min_density(dm, ds):
    rep = optimal_audit()
    m, s = rep.center
    assert min_table_density(m + dm, s + ds) < rep.center_value


def test_audit_off_center_is_not_max():
    rep = neighborhood_audit(CmsnParams(F(4, 5), F(3, 5), 1), 0.05)
    assert not rep.center_is_max
    assert len(table_limits(0.8, 0.6)) == 3
