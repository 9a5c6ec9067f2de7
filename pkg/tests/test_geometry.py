"""Domain oracles: membership, linear optimization, separation, projection,
and shrinking."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drsubmax.geometry import (Box, DimensionMismatch, Knapsack, ScaledBox,
                               ShrunkDomain, make_domain)


def sample_domains():
    return [
        Box(1), Box(3),
        ScaledBox(2, 0.7),
        Knapsack(np.array([1.0, 1.0]), 1.0),
        Knapsack(np.array([1.0, 2.0, 0.5]), 1.5),
        Knapsack(np.array([0.0, 1.0]), 0.8),  # a zero-weight coordinate
    ]


# -- membership ---------------------------------------------------------------

def test_origin_always_feasible():
    for dom in sample_domains():
        assert dom.contains(np.zeros(dom.dim))


def test_box_membership_examples():
    dom = Box(3)
    assert dom.contains(np.zeros(3))
    assert not dom.contains(np.array([1.1, 0.0, 0.0]), tol=1e-9)


def test_knapsack_membership_example():
    dom = Knapsack(np.array([1.0, 1.0]), 1.0)
    assert not dom.contains(np.array([0.6, 0.6]), tol=1e-9)
    assert dom.contains(np.array([0.5, 0.5]))


def test_down_closedness_sampled():
    rng = np.random.default_rng(0)
    for dom in sample_domains():
        for _ in range(200):
            y = dom.euclidean_project(rng.uniform(0, 1, dom.dim))
            x = y * rng.uniform(0, 1, dom.dim)
            assert dom.contains(x)


def test_inner_ball_and_diameter():
    rng = np.random.default_rng(1)
    for dom in sample_domains():
        pts = []
        for _ in range(300):
            u = rng.standard_normal(dom.dim)
            u /= np.linalg.norm(u)
            assert dom.contains(dom.center + dom.inner_radius * u, tol=1e-9)
            pts.append(dom.euclidean_project(rng.uniform(-0.5, 1.5, dom.dim)))
        pts = np.array(pts)
        dists = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
        assert dists.max() <= dom.diameter + 1e-9


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatch):
        Box(2).contains(np.zeros(3))


# -- linear optimization oracle ----------------------------------------------

def test_linear_maximize_examples():
    box = Box(2)
    assert np.allclose(box.linear_maximize(np.array([1.0, 1.0])), [1, 1])
    assert np.allclose(box.linear_maximize(np.array([1.0, -1.0])), [1, 0])
    knap = Knapsack(np.array([1.0, 2.0]), 2.0)
    assert np.allclose(knap.linear_maximize(np.array([1.0, 3.0])), [0, 1])


def test_loo_optimality_sampled():
    rng = np.random.default_rng(2)
    for dom in sample_domains():
        C = rng.uniform(-1, 1, (1000, dom.dim))
        X = np.array([dom.euclidean_project(rng.uniform(0, 1, dom.dim))
                      for _ in range(1000)])
        for c in C[:50]:
            v = dom.linear_maximize(c)
            assert dom.contains(v)
        # full 1000 x 1000 comparison on one representative of each kind
        V = np.array([dom.linear_maximize(c) for c in C])
        assert np.all(np.einsum("ti,ti->t", C, V)[:, None]
                      >= C @ X.T - 1e-9)


# -- separation oracle ---------------------------------------------------------

def test_separate_examples():
    box = Box(2)
    assert box.separate(np.array([0.5, 0.5])) is None
    assert np.allclose(box.separate(np.array([1.2, 0.5])), [1, 0])
    knap = Knapsack(np.array([1.0, 1.0]), 1.0)
    assert np.allclose(knap.separate(np.array([0.8, 0.8])), [1, 1])


def test_separation_soundness_sampled():
    rng = np.random.default_rng(3)
    for dom in sample_domains():
        X = np.array([dom.euclidean_project(rng.uniform(0, 1, dom.dim))
                      for _ in range(1000)])
        for _ in range(100):
            y = rng.uniform(-0.6, 1.6, dom.dim)
            g = dom.separate(y)
            if g is None:
                assert dom.contains(y)
            else:
                assert np.all((y - X) @ g > 0)


# -- Euclidean projection -------------------------------------------------------

def test_projection_examples():
    box = Box(2)
    assert np.allclose(box.euclidean_project(np.array([1.5, -0.3])), [1, 0])
    inside = np.array([0.3, 0.4])
    assert np.allclose(box.euclidean_project(inside), inside)
    knap = Knapsack(np.array([1.0, 1.0]), 1.0)
    assert np.allclose(knap.euclidean_project(np.array([1.0, 1.0])),
                       [0.5, 0.5], atol=1e-9)


def test_projection_optimality_sampled():
    rng = np.random.default_rng(4)
    for dom in sample_domains():
        X = np.array([dom.euclidean_project(rng.uniform(0, 1, dom.dim))
                      for _ in range(1000)])
        for _ in range(50):
            y = rng.uniform(-0.6, 1.6, dom.dim)
            p = dom.euclidean_project(y)
            assert dom.contains(p, tol=1e-8)
            assert np.all(np.linalg.norm(p - y)
                          <= np.linalg.norm(X - y, axis=1) + 1e-8)


def test_batched_projection_matches_scalar():
    rng = np.random.default_rng(5)
    for dom in sample_domains():
        Y = rng.uniform(-0.8, 1.8, (400, dom.dim))
        batch = dom.euclidean_project_many(Y)
        ref = np.array([dom.euclidean_project(y) for y in Y])
        assert np.allclose(batch, ref, atol=1e-8)


# -- affine projection and shrink ----------------------------------------------

def test_affine_project_identity_idempotent():
    dom = Box(3)
    y = np.array([1.7, -0.2, 0.4])
    p = dom.affine_project(y)
    assert np.allclose(p, y)
    assert np.allclose(dom.affine_project(p), p)


def test_shrink_examples():
    dom = Box(1)
    assert dom.shrink(0.0) is dom
    sub = dom.shrink(0.25)
    assert sub.contains(np.array([0.25])) and sub.contains(np.array([0.75]))
    assert not sub.contains(np.array([0.2499]), tol=1e-12)
    assert not sub.contains(np.array([0.7501]), tol=1e-12)
    with pytest.raises(ValueError):
        dom.shrink(0.5)


def test_shrink_depth_property():
    rng = np.random.default_rng(6)
    for dom in sample_domains():
        delta = 0.3 * dom.inner_radius
        sub = dom.shrink(delta)
        for _ in range(200):
            x = sub.euclidean_project(rng.uniform(0, 1, dom.dim))
            u = rng.standard_normal(dom.dim)
            u /= np.linalg.norm(u)
            assert dom.contains(x + delta * u, tol=1e-8)


def test_shrunk_retract_lands_inside():
    rng = np.random.default_rng(7)
    for dom in sample_domains():
        sub = ShrunkDomain(dom, 0.25 * dom.inner_radius)
        for _ in range(100):
            x = dom.euclidean_project(rng.uniform(0, 1, dom.dim))
            assert sub.contains(sub.retract(x), tol=1e-9)


def test_make_domain_dispatch():
    assert isinstance(make_domain("box", 3), Box)
    assert isinstance(make_domain("scaled_box", 2, scale=0.5), ScaledBox)
    k = make_domain("knapsack", 2, weights=(1.0, 1.0), budget=1.0)
    assert isinstance(k, Knapsack)
    with pytest.raises(ValueError):
        make_domain("simplex", 2)
    with pytest.raises(ValueError):
        make_domain("knapsack", 2)  # missing weights/budget


def test_knapsack_budget_validation():
    with pytest.raises(ValueError):
        Knapsack(np.array([1.0, 1.0]), 0.0)
    with pytest.raises(ValueError):
        Knapsack(np.array([1.0, 1.0]), 2.5)  # vacuous budget


# -- hypothesis properties -------------------------------------------------------

coords = st.floats(min_value=-2.0, max_value=3.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(coords, min_size=2, max_size=5))
def test_box_projection_is_clamp(vals):
    y = np.array(vals)
    dom = Box(y.size)
    assert np.allclose(dom.euclidean_project(y), np.clip(y, 0, 1))


@settings(max_examples=200, deadline=None)
@given(st.lists(coords, min_size=2, max_size=4),
       st.floats(min_value=0.3, max_value=2.0))
def test_knapsack_projection_feasible_and_fixed_inside(vals, budget):
    y = np.array(vals)
    w = np.ones(y.size)
    budget = min(budget, y.size - 1e-9)
    dom = Knapsack(w, budget)
    p = dom.euclidean_project(y)
    assert dom.contains(p, tol=1e-8)
    if dom.contains(y):
        assert np.allclose(p, y, atol=1e-9)
