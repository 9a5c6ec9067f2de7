"""Feedback-mode reduction drivers: query discipline, block structure,
feasibility, determinism, and the instrumentation hooks."""

import numpy as np
import pytest

from drsubmax.geometry import Box, Knapsack
from drsubmax.harness import AdversarySpec, build_adversary
from drsubmax.learners import SoOga
from drsubmax.reductions import (RunRecord, default_block_size,
                                 default_fotzo_delta, default_stb_delta,
                                 run_bandit, run_first_order_full,
                                 run_semi_bandit, run_zeroth_full,
                                 unit_sphere_sample)
from drsubmax.surrogate import SurrogateContext, grad_F_quadrature


def make_setup(T=64, dim=2, sigma=0.0, seed=0, dom=None):
    spec = AdversarySpec("iid_random", dim, instance_seed=seed,
                         noise_sigma=sigma)
    adversary = build_adversary(spec, T)
    dom = dom or Box(dim)
    return adversary, dom


def run_mode(mode, adversary, dom, T, rng_seed=0, instrument=False):
    rng = np.random.default_rng(rng_seed)
    if mode == "first_full":
        learner = SoOga(dom, T, adversary.m1)
        return run_first_order_full(adversary, dom, learner, rng,
                                    instrument=instrument)
    if mode == "semi_bandit":
        learner = SoOga(dom, T, adversary.m1)
        return run_semi_bandit(adversary, dom, learner,
                               default_block_size(T), rng)
    delta = (default_fotzo_delta(T, dom.inner_radius) if mode == "zeroth_full"
             else default_stb_delta(T, dom.inner_radius))
    shrunk = dom.shrink(delta)
    m1 = dom.dim / delta * (adversary.value_bound + 1.0)
    learner = SoOga(shrunk, T, m1)
    if mode == "zeroth_full":
        return run_zeroth_full(adversary, dom, learner, delta, rng)
    return run_bandit(adversary, dom, learner, default_block_size(T),
                      delta, rng)


MODES = ("first_full", "semi_bandit", "zeroth_full", "bandit")


# -- shared discipline ---------------------------------------------------------

@pytest.mark.parametrize("mode", MODES)
def test_one_query_per_round(mode):
    T = 64
    adversary, dom = make_setup(T)
    record = run_mode(mode, adversary, dom, T)
    assert record.query_counts.sum() == T
    assert np.all(record.query_counts == 1)


@pytest.mark.parametrize("mode", MODES)
def test_trivial_query_flags(mode):
    T = 32
    adversary, dom = make_setup(T)
    record = run_mode(mode, adversary, dom, T)
    assert record.queries_trivial == (mode in ("semi_bandit", "bandit"))
    assert record.meta["mode"] == mode


@pytest.mark.parametrize("mode", MODES)
def test_played_points_feasible_and_rewards_nonnegative(mode):
    T = 96
    adversary, dom = make_setup(T, dim=3, sigma=0.2,
                                dom=Knapsack(np.array([1.0, 1.0, 1.0]), 1.2))
    record = run_mode(mode, adversary, dom, T)
    assert np.all(dom.contains_many(record.played, tol=1e-8))
    assert record.rewards.min() >= -1e-12


@pytest.mark.parametrize("mode", MODES)
def test_replay_determinism(mode):
    T = 48
    a1, dom = make_setup(T, sigma=0.3)
    a2, _ = make_setup(T, sigma=0.3)
    r1 = run_mode(mode, a1, dom, T, rng_seed=7)
    r2 = run_mode(mode, a2, dom, T, rng_seed=7)
    assert np.array_equal(r1.rewards, r2.rewards)
    assert np.array_equal(r1.played, r2.played)


def test_different_seeds_differ():
    T = 48
    a1, dom = make_setup(T, sigma=0.3)
    a2, _ = make_setup(T, sigma=0.3)
    r1 = run_mode("first_full", a1, dom, T, rng_seed=7)
    r2 = run_mode("first_full", a2, dom, T, rng_seed=8)
    assert not np.array_equal(r1.played, r2.played)


# -- blocking ---------------------------------------------------------------------

def test_block_structure_and_partial_final_block():
    T, L = 70, 8  # 8 full blocks + 6-round partial tail
    adversary, dom = make_setup(T)
    learner = SoOga(dom, T, adversary.m1)
    record = run_semi_bandit(adversary, dom, learner, L,
                             np.random.default_rng(0))
    played = record.played
    for q in range(T // L):
        block = played[q * L:(q + 1) * L]
        # exactly one round of the block deviates from the block action
        counts = {}
        for row in block:
            counts[tuple(np.round(row, 12))] = counts.get(
                tuple(np.round(row, 12)), 0) + 1
        assert sorted(counts.values()) in ([L], [1, L - 1])
    tail = played[(T // L) * L:]
    assert len(tail) == T % L
    assert np.allclose(tail, tail[0])  # tail replays the last action


def test_default_block_size_cuberoot():
    assert default_block_size(1) == 2
    assert default_block_size(1000) == 10
    assert default_block_size(1024) == 11


def test_default_smoothing_radii():
    r = 0.5
    assert default_fotzo_delta(256, r) == pytest.approx(256 ** -0.25)
    assert default_fotzo_delta(2, r) == pytest.approx(0.25)  # capped at r/2
    assert default_stb_delta(100, r) == pytest.approx(0.01)


# -- smoothing wrappers -------------------------------------------------------------

def test_zeroth_requires_shrunk_learner():
    T = 16
    adversary, dom = make_setup(T)
    learner = SoOga(dom, T, adversary.m1)
    with pytest.raises(ValueError):
        run_zeroth_full(adversary, dom, learner, 0.1,
                        np.random.default_rng(0))


def test_bandit_query_point_is_played_point():
    T = 40
    adversary, dom = make_setup(T)
    record = run_mode("bandit", adversary, dom, T)
    # rewards recomputed from the played trace must match the trace exactly
    want = np.array([adversary.value(t, record.played[t]) for t in range(T)])
    assert np.array_equal(record.rewards, want)
    assert record.meta["delta_smooth"] > 0


def test_unit_sphere_sample_is_unit():
    rng = np.random.default_rng(1)
    for d in (1, 2, 7):
        for _ in range(50):
            v = unit_sphere_sample(rng, d)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


# -- instrumentation ------------------------------------------------------------------

def test_instrumented_surrogate_vectors_match_quadrature():
    T = 24
    adversary, dom = make_setup(T, dim=2)
    record = run_mode("first_full", adversary, dom, T, instrument=True)
    assert record.base_actions.shape == (T, 2)
    for t in range(T):
        ctx = adversary.surrogate_context(t)
        want = grad_F_quadrature(ctx, record.base_actions[t])
        assert np.allclose(record.surrogate_vectors[t], want, atol=1e-12)


def test_run_record_validation():
    with pytest.raises(ValueError):
        RunRecord(np.zeros(4), np.ones(3, int), np.zeros((4, 2)), False)
    with pytest.raises(ValueError):
        RunRecord(np.zeros(4), np.zeros(4, int), np.zeros((4, 2)), False)
    with pytest.raises(ValueError):
        RunRecord(np.array([0.0, -1.0]), np.ones(2, int), np.zeros((2, 2)),
                  False)
