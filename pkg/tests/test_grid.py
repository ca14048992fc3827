from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monorelax.grid import Grid, StepProfile, integrate_product, merge_times


def test_uniform_grid_nodes():
    g = Grid(2.0, 4)
    assert np.array_equal(g.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert g.dt == 0.5
    assert g.is_uniform


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid(1.0, 0)
    with pytest.raises(ValueError):
        Grid(-1.0, 3)
    with pytest.raises(ValueError):
        Grid.from_times([0.0, 0.5, 0.5, 1.0])


def test_grid_equality_uses_nodes():
    assert Grid(1.0, 4) == Grid.from_times([0.0, 0.25, 0.5, 0.75, 1.0])
    assert Grid(1.0, 4) != Grid.from_times([0.0, 0.1, 0.5, 0.75, 1.0])
    assert hash(Grid(1.0, 4)) == hash(Grid(1.0, 4))


def test_interval_index_is_right_continuous():
    g = Grid(1.0, 4)
    assert list(g.interval_index([0.0, 0.24, 0.25, 0.99, 1.0])) == [0, 0, 1, 3, 3]


def test_merge_times_collapses_roundoff():
    g = merge_times(Grid(1.0, 3), [0.0, 1.0 / 3.0 + 1e-15, 0.5, 1.0])
    assert g.K == 4
    assert np.allclose(g.times, [0.0, 1 / 3, 0.5, 2 / 3, 1.0])


@given(st.lists(st.integers(1, 12), min_size=1, max_size=4))
def test_merge_of_uniform_grids_contains_each(Ks):
    g = merge_times(*[Grid(1.0, K) for K in Ks])
    for K in Ks:
        for t in Grid(1.0, K).times:
            assert np.min(np.abs(g.times - t)) <= 1e-12


def test_step_profile_evaluation_and_integral():
    p = StepProfile([0.0, 0.5, 2.0], [1.0, 3.0])
    assert p(0.0) == 1.0 and p(0.49) == 1.0 and p(0.5) == 3.0 and p(2.0) == 3.0
    assert p.integral() == pytest.approx(0.5 + 4.5)
    assert p.sup() == 3.0


def test_step_profile_rejects_negative_values():
    with pytest.raises(ValueError):
        StepProfile([0.0, 1.0], [-0.1])
    with pytest.raises(ValueError):
        StepProfile([0.1, 1.0], [1.0])


def test_integrate_product_with_transform():
    a = StepProfile([0.0, 0.5, 1.0], [1.0, 2.0])
    a0 = StepProfile([0.0, 0.25, 1.0], [0.5, 3.0])
    # max(1, a0) = 1 on [0, .25), 3 after
    expected = 0.25 * 1 * 1 + 0.25 * 1 * 3 + 0.5 * 2 * 3
    assert integrate_product(a, a0, lambda v: np.maximum(1.0, v)) == pytest.approx(expected)
