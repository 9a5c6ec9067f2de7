"""Base learners: the separation-guided infeasible projection, online gradient
ascent built on it, and the expert-ensemble dynamic learner."""

import numpy as np
import pytest

from drsubmax.geometry import Box, Knapsack
from drsubmax.learners import (ImprovedAder, SoOga, make_learner, so_ip,
                               so_ip_path)


# -- infeasible projection -------------------------------------------------------

def test_so_ip_identity_inside():
    dom = Box(3)
    y0 = np.array([0.2, 0.5, 0.9])
    path = so_ip_path(dom, y0, 0.1)
    assert len(path) == 1
    assert np.allclose(path[0], y0)


def test_so_ip_hand_simulated_trajectory():
    # interval [0,1], start 1.3, step 0.1: 1.3 -> 1.2 -> 1.1 -> 1.0
    dom = Box(1)
    path = so_ip_path(dom, np.array([1.3]), 0.1)
    assert np.allclose(np.concatenate(path), [1.3, 1.2, 1.1, 1.0], atol=1e-12)
    assert so_ip(dom, np.array([1.3]), 0.1)[0] == pytest.approx(1.0, abs=1e-12)


def test_so_ip_output_feasible():
    rng = np.random.default_rng(0)
    for dom in (Box(3), Knapsack(np.array([1.0, 1.0, 1.0]), 1.2)):
        for _ in range(200):
            y0 = rng.uniform(-1.0, 2.0, 3)
            out = so_ip(dom, y0, 0.05)
            assert dom.contains(out, tol=1e-8)


def test_so_ip_distance_contraction():
    # vs points of the shrunk set: ||output - x|| <= ||y0 - x|| + tol
    rng = np.random.default_rng(1)
    dom = Box(3)
    delta = 0.05
    shrunk = dom.shrink(delta)
    X = np.array([shrunk.euclidean_project(rng.uniform(0, 1, 3))
                  for _ in range(1000)])
    for _ in range(50):
        y0 = rng.uniform(-0.5, 1.5, 3)
        out = so_ip(dom, y0, delta)
        assert np.all(np.linalg.norm(out - X, axis=1)
                      <= np.linalg.norm(y0 - X, axis=1) + 1e-9)


def test_so_ip_rejects_bad_delta():
    dom = Box(2)
    with pytest.raises(ValueError):
        so_ip(dom, np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        so_ip(dom, np.zeros(2), 0.6)  # >= inner radius


# -- online gradient ascent -------------------------------------------------------

def test_so_oga_zero_reward_is_fixed_point():
    dom = Box(2)
    learner = SoOga(dom, horizon=100, m1=1.0)
    x0 = learner.next_action().copy()
    learner.feed(np.zeros(2))
    assert np.allclose(learner.next_action(), x0)


def test_so_oga_interior_step():
    dom = Box(1)
    learner = SoOga(dom, horizon=100, m1=1.0)
    learner.x = np.array([0.5])
    learner.eta = 0.1
    learner.feed(np.array([1.0]))
    assert learner.next_action()[0] == pytest.approx(0.6, abs=1e-12)


def test_so_oga_step_size_formula():
    dom = Box(3)
    learner = SoOga(dom, horizon=400, m1=2.0, v=0.5)
    assert learner.eta == pytest.approx(0.5 * 0.5 / (2 * 2.0) / 20.0)
    assert learner.delta == pytest.approx(0.5 / 20.0)


def test_so_oga_rejects_bad_v():
    dom = Box(2)  # inner radius 0.5
    with pytest.raises(ValueError):
        SoOga(dom, horizon=4, m1=1.0, v=1.5)  # delta = 0.75 >= r


def test_so_oga_constant_reward_converges_to_vertex():
    dom = Box(2)
    c = np.array([1.0, -1.0])
    T = 400
    learner = SoOga(dom, horizon=T, m1=float(np.linalg.norm(c)), v=0.5)
    for _ in range(T):
        learner.feed(c)
    target = dom.linear_maximize(c)
    slack = learner.delta + learner.eta * np.linalg.norm(c)
    assert np.linalg.norm(learner.next_action() - target) <= 10 * slack + 0.1


def test_so_oga_iterates_feasible():
    rng = np.random.default_rng(2)
    dom = Knapsack(np.array([1.0, 2.0]), 1.5)
    learner = SoOga(dom, horizon=200, m1=2.0)
    for _ in range(200):
        assert dom.contains(learner.next_action(), tol=1e-8)
        learner.feed(rng.uniform(-1, 1, 2))


# -- expert ensemble ----------------------------------------------------------------

def test_ader_initial_weights_two_experts():
    # T=4 gives N=2 experts, C=1.5, weights (0.75, 0.25)
    learner = ImprovedAder(Box(2), horizon=4, m1=1.0)
    assert learner.weights.size == 2
    assert np.allclose(learner.weights, [0.75, 0.25])


def test_ader_grid_size_formula():
    import math
    for T in (4, 64, 1024, 16384):
        learner = ImprovedAder(Box(2), horizon=T, m1=1.0)
        want = math.ceil(0.5 * math.log2(1 + 4 * T / 7)) + 1
        assert learner.etas.size == want
        # geometric grid with ratio 2
        assert np.allclose(learner.etas[1:] / learner.etas[:-1], 2.0)


def test_ader_zero_reward_is_fixed_point():
    learner = ImprovedAder(Box(3), horizon=16, m1=1.0)
    w0 = learner.weights.copy()
    e0 = learner.experts.copy()
    learner.next_action()
    learner.feed(np.zeros(3))
    assert np.allclose(learner.weights, w0)
    assert np.allclose(learner.experts, e0)


def test_ader_identical_experts_degenerate_mixture():
    learner = ImprovedAder(Box(2), horizon=4, m1=1.0)
    point = np.array([0.3, 0.6])
    learner.experts[:] = point
    learner.weights = np.array([0.9, 0.1])
    assert np.allclose(learner.next_action(), point)


def test_ader_weights_stay_on_simplex():
    rng = np.random.default_rng(3)
    learner = ImprovedAder(Box(3), horizon=256, m1=2.0)
    for _ in range(256):
        learner.next_action()
        learner.feed(rng.uniform(-2, 2, 3))
        assert learner.weights.min() >= 0
        assert learner.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_ader_actions_feasible():
    rng = np.random.default_rng(4)
    dom = Knapsack(np.array([1.0, 1.0, 1.0]), 1.2)
    learner = ImprovedAder(dom, horizon=128, m1=2.0)
    for _ in range(128):
        assert dom.contains(learner.next_action(), tol=1e-8)
        learner.feed(rng.uniform(-2, 2, 3))


def test_ader_so_ip_projection_matches_exact_roughly():
    rng = np.random.default_rng(5)
    T = 64
    rewards = rng.uniform(-1, 1, (T, 2))
    exact = ImprovedAder(Box(2), horizon=T, m1=1.0, expert_projection="exact")
    walk = ImprovedAder(Box(2), horizon=T, m1=1.0, expert_projection="so_ip")
    for r in rewards:
        exact.next_action()
        walk.next_action()
        exact.feed(r)
        walk.feed(r)
    # the walk-based projection stays within its step length of the exact one
    assert np.abs(exact.experts - walk.experts).max() <= 0.2


def test_make_learner_dispatch():
    dom = Box(2)
    assert isinstance(make_learner("so_oga", dom, 16, 1.0), SoOga)
    assert isinstance(make_learner("ader", dom, 16, 1.0), ImprovedAder)
    with pytest.raises(ValueError):
        make_learner("ftrl", dom, 16, 1.0)
