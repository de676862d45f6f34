import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsparq.dpp import GAIN_FLOOR, greedy_dpp_select, query_budget
from wsparq.kernels import KernelSpec, gram

SPEC = KernelSpec.matern(1.5, 0.2)


def test_single_candidate():
    assert greedy_dpp_select(SPEC, [[0.3]], 3) == [0]


def test_duplicates_selected_once():
    assert greedy_dpp_select(SPEC, [[0.3], [0.3]], 2) == [0]


def test_all_distinct_selected_when_budget_allows():
    X = [[0.1], [0.5], [0.5], [0.9], [0.1]]
    chosen = greedy_dpp_select(SPEC, X, 10)
    assert sorted(X[i][0] for i in chosen) == [0.1, 0.5, 0.9]


def test_empty_candidates_and_bad_budget():
    assert greedy_dpp_select(SPEC, np.empty((0, 1)), 2) == []
    with pytest.raises(ValueError):
        greedy_dpp_select(SPEC, [[0.1]], 0)


def test_lowest_index_wins_ties():
    # both ends are equally far from everything; first step has uniform gain
    assert greedy_dpp_select(SPEC, [[0.0], [0.5], [1.0]], 1) == [0]


def test_gains_are_residual_variances():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (12, 1))
    chosen, gains = greedy_dpp_select(SPEC, X, 6, return_gains=True)
    # product of gains equals the determinant of the selected Gram block
    K = gram(SPEC, X[chosen])
    assert math.prod(gains) == pytest.approx(np.linalg.det(K), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(pts=st.lists(st.floats(0, 1), min_size=1, max_size=30), budget=st.integers(1, 30))
def test_gains_non_increasing_and_no_near_duplicates(pts, budget):
    X = np.array(pts)[:, None]
    chosen, gains = greedy_dpp_select(SPEC, X, budget, return_gains=True)
    assert len(chosen) <= budget
    assert all(g >= GAIN_FLOOR for g in gains)
    assert all(b <= a + 1e-12 for a, b in zip(gains, gains[1:]))
    sel = X[chosen, 0]
    if len(sel) > 1:
        diffs = np.abs(sel[:, None] - sel[None, :])[~np.eye(len(sel), dtype=bool)]
        assert diffs.min() > 1e-12


def test_query_budget_examples():
    se = KernelSpec.se()
    assert query_budget(1, se, 1) == 1
    assert query_budget(1, SPEC, 1) == 1
    assert query_budget(round(math.e**2), se, 1) == 2  # log(7) = 1.95 -> 2
    assert query_budget(9, KernelSpec.matern(1.5), 1) == 9
    assert query_budget(100, KernelSpec.matern(2.5), 1, 0.5) == math.ceil(0.5 * 100**0.5)


def test_query_budget_at_e_squared():
    assert query_budget(math.e**2, KernelSpec.se(), 1) == 2


@pytest.mark.parametrize("spec", [KernelSpec.se(), KernelSpec.matern(1.5), KernelSpec.matern(2.5)],
                         ids=["se", "m32", "m52"])
def test_query_budget_non_decreasing(spec):
    q = [query_budget(t, spec, 1, 0.3) for t in range(1, 3000)]
    assert min(q) >= 1
    assert all(b >= a for a, b in zip(q, q[1:]))


def test_query_budget_requires_two_nu_above_d():
    with pytest.raises(ValueError):
        query_budget(10, KernelSpec.matern(0.5), 1)
