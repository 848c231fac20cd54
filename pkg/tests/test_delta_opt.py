import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixballs import OptimizerConfig, delta_objective, lagrange_residual, optimize_delta_n
from matrixballs.constants import delta_p_closed_form
from oracles import hermite_delta_n


def angle_grid_delta_two(p, m=200_001):
    """Brute-force sup over the unit circle for n = 2 (objective is scale invariant)."""
    th = np.linspace(0, 2 * np.pi, m)
    x, y = np.cos(th), np.sin(th)
    with np.errstate(divide="ignore"):
        f = np.log(np.abs(x - y)) - np.log(0.5 * (np.abs(x) ** p + np.abs(y) ** p)) / p
    return math.exp(np.max(f))


@pytest.mark.parametrize("n", [3, 5, 8, 12, 20])
def test_p2_matches_hermite_roots(n):
    r = optimize_delta_n(2.0, n)
    assert r.converged
    assert r.delta_n == pytest.approx(hermite_delta_n(n), rel=1e-12)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 4.0])
def test_n2_matches_angle_grid(p):
    r = optimize_delta_n(p, 2)
    assert r.delta_n == pytest.approx(angle_grid_delta_two(p), rel=1e-6)
    assert r.delta_n == pytest.approx(max(2.0, 2 ** (1 / p)), abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0])
def test_nonincreasing_in_n(p):
    vals = [optimize_delta_n(p, n).delta_n for n in range(2, 11)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    assert vals[-1] > delta_p_closed_form(p)


@pytest.mark.parametrize("p,n", [(0.5, 4), (1.0, 5), (1.2, 7), (1.5, 6), (2.0, 10), (4.0, 8), (6.0, 5)])
def test_converged_first_order_conditions(p, n):
    r = optimize_delta_n(p, n)
    assert r.converged, r.message
    assert r.max_lagrange_residual < 1e-6
    assert r.lambda_identity_error < 1e-9
    assert np.sum(np.abs(r.points) ** p) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(np.sort(r.points)) > 0)


@pytest.mark.parametrize("p,n", [(1.0, 4), (2.0, 5), (4.0, 4), (0.5, 3)])
def test_random_configurations_never_beat_optimum(p, n):
    best = optimize_delta_n(p, n).log_delta_n
    rng = np.random.default_rng(1)
    for _ in range(2000):
        t = rng.standard_normal(n)
        assert delta_objective(p, t) <= best + 1e-12


def test_mirror_is_also_optimal():
    r = optimize_delta_n(1.5, 5)
    assert delta_objective(1.5, r.mirror()) == pytest.approx(r.log_delta_n, abs=1e-12)


def test_deterministic():
    a = optimize_delta_n(0.7, 5, OptimizerConfig(seed=3))
    b = optimize_delta_n(0.7, 5, OptimizerConfig(seed=3))
    np.testing.assert_array_equal(a.points, b.points)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=9, unique=True),
    st.floats(0.5, 6.0),
)
def test_lagrange_identity_any_distinct_points(values, p):
    t = np.array(values)
    if np.min(np.diff(np.sort(t))) < 1e-3:
        return
    n = t.size
    lam, _ = lagrange_residual(p, t)
    assert lam == pytest.approx(n * (n - 1) / 2, abs=1e-9 * n * n)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=9, unique=True),
    st.floats(0.5, 6.0),
    st.floats(0.01, 100.0),
)
def test_objective_scale_and_permutation_invariant(values, p, c):
    t = np.array(values)
    if np.min(np.diff(np.sort(t))) < 1e-6 or not np.any(t):
        return
    f = delta_objective(p, t)
    assert delta_objective(p, c * t) == pytest.approx(f, abs=1e-9)
    assert delta_objective(p, t[::-1]) == pytest.approx(f, abs=1e-12)


def test_objective_collision_and_zero():
    assert delta_objective(2.0, [0.1, 0.1, 0.5]) == -math.inf
    with pytest.raises(ValueError):
        delta_objective(2.0, [0.0, 0.0])


def test_residual_zero_at_hermite_optimum():
    r = optimize_delta_n(2.0, 6)
    _, res = lagrange_residual(2.0, r.points)
    assert np.max(np.abs(res)) < 1e-8


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"optimizer": {"tol": 1e-8, "restarts": 2}}))
    cfg = OptimizerConfig.from_json(path)
    assert cfg.tol == 1e-8 and cfg.restarts == 2 and cfg.seed == 0
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        OptimizerConfig(tol=-1.0)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        optimize_delta_n(2.0, 1)
    with pytest.raises(ValueError):
        optimize_delta_n(-1.0, 4)


def test_result_serialises():
    d = optimize_delta_n(2.0, 4).as_dict()
    json.dumps(d)
    assert d["n"] == 4 and d["converged"]
