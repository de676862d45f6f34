import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsparq import gp
from wsparq.acquisition import (DecisionGrid, RewardSpec, RewardStructure, acquisition_values,
                                benchmark_reward, inner_max_over_box, inner_min_over_box,
                                regret_width_diagnostic, select_action)
from wsparq.environments import SyntheticBilevel, oracle_optimum
from wsparq.gp import ConfidenceBox
from wsparq.kernels import KernelSpec

F = benchmark_reward()
SPEC = KernelSpec.matern(1.5, 0.2)


def box(lo, hi, m=2):
    return ConfidenceBox(np.full(m, lo, dtype=float), np.full(m, hi, dtype=float))


@pytest.mark.parametrize("x", [0.0, 0.3, 0.5, 1.0])
def test_inner_max_examples(x):
    y, v = inner_max_over_box(F, [x], box(-1, 2))
    np.testing.assert_array_equal(y, [0, 0])
    assert v == pytest.approx(-(x - 0.5) ** 2)
    y, v = inner_max_over_box(F, [x], box(1, 2))
    np.testing.assert_array_equal(y, [1, 1])
    assert v == pytest.approx(-(x - 0.5) ** 2 - 1)
    a = np.array([0.3, -1.2])
    y, v = inner_max_over_box(F, [x], ConfidenceBox(a, a))
    np.testing.assert_array_equal(y, a)
    assert v == pytest.approx(F([x], a))


@pytest.mark.parametrize("x", [0.0, 0.7])
def test_inner_min_examples(x):
    y, v = inner_min_over_box(F, [x], box(-1, 2))
    np.testing.assert_array_equal(y, [2, 2])
    assert v == pytest.approx(-(x - 0.5) ** 2 - 4)
    a = np.array([0.3, -1.2])
    assert inner_min_over_box(F, [x], ConfidenceBox(a, a))[1] == inner_max_over_box(
        F, [x], ConfidenceBox(a, a))[1]
    y, v = inner_min_over_box(F, [x], box(-1.5, 1.5))
    np.testing.assert_array_equal(y, [-1.5, -1.5])
    assert v == pytest.approx(-(x - 0.5) ** 2 - 1.5**2)


def test_prior_model_selects_midpoint():
    grid = DecisionGrid(resolution=256)
    prior = gp.fit(SPEC, gp.ObservationSet(1, 2))
    x, _ = select_action(prior, 2.0, F, grid)
    assert abs(x[0] - 0.5) <= grid.spacing / 2 + 1e-15


def test_exact_posterior_with_zero_beta_picks_oracle():
    grid = DecisionGrid(resolution=41)
    # the fast regime is mirror-symmetric about 0.5, so its optimum is tied
    env = SyntheticBilevel("moderate")
    t = 7
    obs = gp.ObservationSet(1, 2)
    for p in grid.points:
        obs.append(p, env.response(p, t), 0, 1e-10)
    model = gp.fit(SPEC, obs)
    x, _ = select_action(model, 0.0, F, grid)
    x_star, _ = oracle_optimum(env, t, grid)
    np.testing.assert_array_equal(x, x_star)


def test_tie_break_lowest_index():
    grid = DecisionGrid(resolution=2)
    prior = gp.fit(SPEC, gp.ObservationSet(1, 2))
    x, _ = select_action(prior, 1.0, F, grid)
    assert x[0] == 0.0


def test_regret_width_diagnostic():
    obs = gp.ObservationSet(1, 2)
    obs.append([0.2], [0.5, -0.5], 0, 0.05)
    obs.append([0.8], [1.0, 0.1], 0, 0.05)
    model = gp.fit(SPEC, obs)
    assert regret_width_diagnostic(model, 0.0, F, [0.4]) == 0.0
    _, std = gp.predict(model, [0.4])
    widths = [regret_width_diagnostic(model, b, F, [0.4]) for b in np.linspace(0, 3, 13)]
    assert all(b >= a for a, b in zip(widths, widths[1:]))
    for b, w in zip(np.linspace(0, 3, 13), widths):
        assert w <= 2 * F.lipschitz * b * std.sum() + 1e-12


lo_hi = st.tuples(st.floats(-3, 3), st.floats(0, 2), st.floats(0, 1))


@settings(max_examples=60, deadline=None)
@given(x=st.floats(0, 1), a=lo_hi, b=lo_hi)
def test_box_monotonicity(x, a, b):
    lcb = np.array([a[0], b[0]])
    ucb = lcb + np.array([a[1], b[1]])
    grow = np.array([a[2], b[2]])
    small = ConfidenceBox(lcb, ucb)
    large = ConfidenceBox(lcb - grow, ucb + grow)
    assert inner_max_over_box(F, [x], large)[1] >= inner_max_over_box(F, [x], small)[1]
    assert inner_min_over_box(F, [x], large)[1] <= inner_min_over_box(F, [x], small)[1]


def test_dominated_point_does_not_change_choice():
    obs = gp.ObservationSet(1, 2)
    obs.append([0.3], [0.1, 0.9], 0, 0.01)
    model = gp.fit(SPEC, obs)
    grid = DecisionGrid(resolution=64)
    x, v = select_action(model, 1.5, F, grid)
    vals = acquisition_values(model, 1.5, F, grid)
    worst = grid.points[int(np.argmin(vals))]
    # append a copy of the worst point to the end of the candidate list
    grid2 = DecisionGrid(resolution=64)
    object.__setattr__(grid2, "points", np.vstack([grid.points, worst]))
    x2, v2 = select_action(model, 1.5, F, grid2)
    np.testing.assert_array_equal(x, x2)
    assert v == v2


def test_closed_form_inner_max_matches_grid_fallback():
    general = RewardSpec(F.evaluator, RewardStructure.GENERAL, inner_resolution=201)
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = rng.uniform(0, 1, 1)
        lcb = rng.uniform(-3, 2, 2)
        ucb = lcb + rng.uniform(0, 2, 2)
        b = ConfidenceBox(lcb, ucb)
        exact = inner_max_over_box(F, x, b)[1]
        approx = inner_max_over_box(general, x, b)[1]
        # nearest inner-grid point is at most half a cell away per coordinate
        h = (ucb - lcb) / 200
        bound = np.sum(np.maximum(np.abs(lcb), np.abs(ucb)) * h / 2 + (h / 2) ** 2 / 2)
        assert approx <= exact + 1e-12
        assert exact - approx <= bound + 1e-12


def test_general_structure_limited_to_two_outputs():
    general = RewardSpec(lambda X, Y: -np.sum(Y**2, axis=-1))
    with pytest.raises(ValueError):
        inner_max_over_box(general, [0.1], box(-1, 1, m=3))


def test_reward_spec_validation():
    with pytest.raises(ValueError):
        RewardSpec(F.evaluator, RewardStructure.SEPARABLE_CONCAVE)
    with pytest.raises(ValueError):
        DecisionGrid(resolution=1)
