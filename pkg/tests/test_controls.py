from __future__ import annotations

import itertools

import numpy as np
import pytest
from conftest import const
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.distance import directed_hausdorff

from monorelax import ControlSetSpec, ControlSignal, Grid
from monorelax.controls import (
    hausdorff,
    lipschitz_probe,
    nearest_point,
    read_signal_csv,
    sample_atoms,
    set_distance,
    weak_norm,
    write_signal_csv,
)

atoms_pm = ControlSetSpec("finite_atoms", 1, const(1.0), const(0.0), atoms=[[-1.0], [1.0]])


def square_wave(n, K_per_half=1):
    """+-1 with period 2/n on [0, 1]."""
    g = Grid(1.0, n * K_per_half)
    vals = np.where((np.arange(g.K) // K_per_half) % 2 == 0, 1.0, -1.0)
    return ControlSignal(g, vals)


def brute_weak_norm(u):
    cum = np.vstack([np.zeros((1, u.m)), np.cumsum(u.values * u.grid.steps[:, None], axis=0)])
    return max(np.linalg.norm(cum[j] - cum[i]) for i in range(len(cum)) for j in range(len(cum)))


def test_sample_atoms_examples():
    assert sample_atoms(atoms_pm, 0.3, [2.0], 5).ravel().tolist() == [-1.0, 1.0]
    box = ControlSetSpec("box", 1, const(1.0), const(0.0), lo=[-1.0], hi=[1.0])
    assert sample_atoms(box, 0.0, [0.0], 3).ravel().tolist() == [-1.0, 0.0, 1.0]
    ball = ControlSetSpec("ball", 1, const(2.0), const(0.0), center=[0.0], radius=2.0)
    assert sample_atoms(ball, 0.0, [0.0], 2).ravel().tolist() == [-2.0, 2.0]


def test_sample_atoms_box_contains_vertices_and_ball_ring():
    box = ControlSetSpec("box", 2, const(2.0), const(0.0), lo=[-1.0, 0.0], hi=[1.0, 2.0])
    pts = sample_atoms(box, 0.0, [0.0], 9)
    for v in itertools.product([-1.0, 1.0], [0.0, 2.0]):
        assert any(np.array_equal(p, v) for p in pts)
    ball = ControlSetSpec("ball", 2, const(1.0), const(0.0), center=[0.0, 0.0], radius=1.0)
    pts = sample_atoms(ball, 0.0, [0.0], 7)
    assert len(pts) == 7 and np.array_equal(pts[0], [0.0, 0.0])
    assert np.allclose(np.linalg.norm(pts[1:], axis=1), 1.0)


def test_nearest_point_examples():
    box = ControlSetSpec("box", 3, const(2.0), const(0.0), lo=-np.ones(3), hi=np.ones(3))
    assert nearest_point(box, 0.0, [0.0], [0.3, -0.2, 0.0]).tolist() == [0.3, -0.2, 0.0]
    assert nearest_point(atoms_pm, 0.0, [0.0], [0.2]).tolist() == [1.0]
    assert nearest_point(box, 0.0, [0.0], [3.0, -7.0, 0.5]).tolist() == [1.0, -1.0, 0.5]


def test_nearest_point_tie_breaks_lexicographically():
    assert nearest_point(atoms_pm, 0.0, [0.0], [0.0]).tolist() == [-1.0]


@given(arrays(float, 2, elements=st.floats(-5, 5)), arrays(float, 2, elements=st.floats(-3, 3)))
def test_nearest_point_is_member(target, x):
    specs = [
        ControlSetSpec("box", 2, const(2.0), const(0.0), lo=[-1.0, -1.0], hi=[1.0, 1.0]),
        ControlSetSpec("ball", 2, const(1.0), const(0.0), center=[0.0, 0.0], radius=1.0),
        ControlSetSpec("finite_atoms", 2, const(3.0), const(0.5), atoms=[[1.0, 0.0], [0.0, 1.0]],
                       kappa=0.5, saturation="tanh"),
    ]
    for spec in specs:
        v = nearest_point(spec, 0.0, x, target)
        assert set_distance(spec, 0.0, x, v) <= 1e-12


def test_hausdorff_examples():
    S = [[0.0, 1.0], [2.0, 3.0]]
    assert hausdorff(S, S) == 0.0
    assert hausdorff([[0.0]], [[3.0]]) == 3.0
    assert hausdorff([[-1.0], [1.0]], [[-1.0], [2.0]]) == 1.0
    with pytest.raises(ValueError):
        hausdorff([], [[1.0]])


pointsets = arrays(float, st.tuples(st.integers(1, 6), st.just(2)), elements=st.floats(-10, 10))


@given(pointsets, pointsets, pointsets)
def test_hausdorff_is_a_metric(A, B, C):
    ab = hausdorff(A, B)
    assert ab == hausdorff(B, A)
    assert hausdorff(A, C) <= ab + hausdorff(B, C) + 1e-12
    oracle = max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0])
    assert ab == pytest.approx(oracle, abs=1e-12)


def test_weak_norm_examples():
    g = Grid(2.0, 7)
    assert weak_norm(ControlSignal.constant(g, [0.0])) == 0.0
    assert weak_norm(ControlSignal.constant(g, [-1.5])) == pytest.approx(3.0)
    assert weak_norm(square_wave(10)) == pytest.approx(0.1, abs=1e-15)


def test_square_wave_weak_norm_decreases():
    vals = [weak_norm(square_wave(n, 3)) for n in (4, 8, 16, 32, 64)]
    assert vals == pytest.approx([1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64], abs=1e-14)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_square_wave_tested_against_steps_vanishes():
    # (value at b, total variation) for step test functions
    tests = [(lambda t: np.ones_like(t), 1.0, 0.0),
             (lambda t: (t < 0.3).astype(float), 0.0, 1.0),
             (lambda t: np.where(t < 0.5, 1.0, -2.0), 2.0, 3.0)]
    for n in (4, 8, 16, 32, 64):
        u = square_wave(n, 10)
        w = weak_norm(u)
        mids = 0.5 * (u.grid.times[1:] + u.grid.times[:-1])
        for phi, end, tv in tests:
            # integration by parts: |int u phi| <= ||u||_w (|phi(b)| + TV(phi))
            assert abs(np.sum(u.values[:, 0] * phi(mids) * u.grid.steps)) <= w * (end + tv) + 1e-14


@given(arrays(float, st.tuples(st.integers(1, 15), st.integers(1, 3)), elements=st.floats(-4, 4)),
       st.integers(0, 10**6))
def test_weak_norm_matches_brute_force_and_l1(vals, seed):
    rng = np.random.default_rng(seed)
    times = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 2.0, len(vals) - 1)), [2.0]])
    if np.any(np.diff(times) <= 1e-9):
        return
    u = ControlSignal(Grid.from_times(times), vals)
    w = weak_norm(u)
    assert w == pytest.approx(brute_weak_norm(u), abs=1e-12)
    assert w <= u.l1_norm() + 1e-12


def test_lipschitz_probe_examples():
    box = ControlSetSpec("box", 1, const(1.0), const(0.0), lo=[-1.0], hi=[1.0])
    assert lipschitz_probe(box, 0.0, [([0.0], [1.0]), ([2.0], [-3.0])]) == 0.0
    shifted = ControlSetSpec("finite_atoms", 1, const(2.0), const(0.5), atoms=[[-1.0], [1.0]],
                             kappa=0.5, saturation="none")
    assert lipschitz_probe(shifted, 0.0, [([0.0], [1.0]), ([2.0], [-3.0])]) == pytest.approx(0.5, abs=1e-12)
    smooth = ControlSetSpec("finite_atoms", 1, const(1.5), const(0.5), atoms=[[-1.0], [1.0]],
                            kappa=0.5, saturation="tanh")
    pairs = [([x], [x + 1e-7]) for x in np.linspace(-3, 3, 31)]
    assert lipschitz_probe(smooth, 0.0, pairs) <= 0.5 + 1e-6


def test_signal_csv_round_trip(tmp_path):
    g = Grid.from_times([0.0, 0.1, 0.35, 1.0])
    u = ControlSignal(g, [[1.0, -2.0], [0.5, 0.25], [1e-17, 3.0]])
    write_signal_csv(u, tmp_path / "u.csv")
    back = read_signal_csv(tmp_path / "u.csv")
    assert back.grid == g and np.array_equal(back.values, u.values)


def test_signal_rejects_nonfinite():
    with pytest.raises(ValueError, match="interval 1"):
        ControlSignal(Grid(1.0, 3), [0.0, np.nan, 1.0])
