from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from monorelax.monotone import (
    MonotoneOperator,
    distance_to_image,
    domain_distance,
    domain_project,
    graph_pairs,
    resolvent,
)

finite = st.floats(-50, 50, allow_nan=False)
lams = st.sampled_from([0.01, 0.1, 1.0])


def operators(N=3):
    return [
        MonotoneOperator.zero(N),
        MonotoneOperator.normal_cone_box([-1.0, 0.0, -np.inf][:N], [2.0, np.inf, 0.5][:N]),
        MonotoneOperator.linear(np.array([[1.0, 2.0, 0.0], [-2.0, 0.5, 0.0], [0.0, 0.0, 0.0]])[:N, :N]),
        MonotoneOperator.subdiff_abs([0.5, 1.0, 0.0][:N]),
    ]


def test_resolvent_examples():
    assert np.array_equal(resolvent(MonotoneOperator.zero(2), 0.1, [1.0, 2.0]), [1.0, 2.0])
    half_line = MonotoneOperator.normal_cone_box([0.0], [np.inf])
    assert resolvent(half_line, 0.5, [-3.0])[0] == 0.0
    assert resolvent(MonotoneOperator.linear([[1.0]]), 1.0, [2.0])[0] == pytest.approx(1.0)


def test_soft_threshold():
    op = MonotoneOperator.subdiff_abs([1.0, 1.0, 1.0])
    assert np.allclose(resolvent(op, 0.5, [2.0, -0.3, -1.0]), [1.5, 0.0, -0.5])


def test_domain_project_examples():
    assert np.array_equal(domain_project(MonotoneOperator.zero(2), [5.0, 5.0]), [5.0, 5.0])
    box = MonotoneOperator.normal_cone_box([0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(domain_project(box, [2.0, -1.0]), [1.0, 0.0])
    assert domain_project(MonotoneOperator.subdiff_abs([1.0]), [-3.0])[0] == -3.0
    assert domain_distance(MonotoneOperator.normal_cone_box([0.0], [np.inf]), [-1.0]) == 1.0


def test_graph_pairs_examples():
    pairs = graph_pairs(MonotoneOperator.zero(1), [[1.0], [2.0]])
    assert [(float(x[0]), float(w[0])) for x, w in pairs] == [(1.0, 0.0), (2.0, 0.0)]
    (x, w), = graph_pairs(MonotoneOperator.linear([[2.0]]), [[1.0]])
    assert w[0] == 2.0
    (x, w), = graph_pairs(MonotoneOperator.normal_cone_box([0.0], [np.inf]), [[0.0]])
    assert w[0] == 0.0


def test_constructor_invariants():
    with pytest.raises(ValueError):
        MonotoneOperator.normal_cone_box([0.5], [1.0])  # 0 not in the box
    with pytest.raises(ValueError):
        MonotoneOperator.normal_cone_box([1.0], [-1.0])
    with pytest.raises(ValueError):
        MonotoneOperator.linear([[-1e-6]])
    MonotoneOperator.linear([[-1e-11]])  # within tolerance
    with pytest.raises(ValueError):
        MonotoneOperator.subdiff_abs([-1.0])


def test_resolvent_rejects_nonfinite_and_bad_lambda():
    op = MonotoneOperator.zero(1)
    with pytest.raises(ValueError):
        resolvent(op, 0.1, [np.nan])
    with pytest.raises(ValueError):
        resolvent(op, 0.0, [1.0])


@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite), lams)
def test_resolvent_firmly_nonexpansive(a, b, lam):
    for op in operators():
        ja, jb = resolvent(op, lam, a), resolvent(op, lam, b)
        d = ja - jb
        assert d @ d <= d @ (a - b) + 1e-10


@given(lams)
def test_resolvent_fixes_origin(lam):
    for op in operators():
        assert np.array_equal(resolvent(op, lam, np.zeros(3)), np.zeros(3))


@given(arrays(float, 3, elements=finite), lams)
def test_resolvent_inverts_identity_plus_A(z, lam):
    for op in operators():
        x = resolvent(op, lam, z)
        assert distance_to_image(op, x, (z - x) / lam) <= 1e-9 * max(1.0, np.abs(z).max() / lam)


@given(st.lists(arrays(float, 3, elements=finite), min_size=2, max_size=8))
def test_graph_is_monotone(samples):
    for op in operators():
        pairs = graph_pairs(op, samples)
        for (x, xs) in pairs:
            for (y, ys) in pairs:
                assert (xs - ys) @ (x - y) >= -1e-12 * max(1.0, abs(xs @ x) + abs(ys @ y))


@given(arrays(float, 3, elements=finite))
def test_domain_project_idempotent(z):
    for op in operators():
        p = domain_project(op, z)
        assert np.array_equal(domain_project(op, p), p)


def test_resolvent_batched_matches_rowwise():
    rng = np.random.default_rng(1)
    Z = rng.normal(size=(7, 3)) * 4
    for op in operators():
        rows = np.array([resolvent(op, 0.3, z) for z in Z])
        assert np.allclose(resolvent(op, 0.3, Z), rows, atol=1e-14)
