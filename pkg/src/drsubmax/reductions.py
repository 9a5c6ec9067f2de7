"""Meta-algorithm layer: the main reduction loop (play h(x), query once,
feed the single-query estimate to a linear base learner) plus the feedback
wrappers for semi-bandit, zeroth-order full-information, and bandit modes.

Feedback modes:
  first_full   non-trivial first-order query at 1 - e^{-z x} each round.
  semi_bandit  trivial queries: blocks of L rounds; the block's query point
               is played on one uniformly chosen round of the block.
  zeroth_full  non-trivial value queries; one-point sphere-smoothed gradient.
  bandit       trivial value queries; blocking plus sphere smoothing.

In every mode each round makes exactly one oracle query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain, ShrunkDomain
from .surrogate import SurrogateContext, bqnd_estimate, grad_F_quadrature, h_map, sample_z

FEEDBACK_MODES = ("first_full", "semi_bandit", "zeroth_full", "bandit")


def default_block_size(horizon: int) -> int:
    return max(2, math.ceil(horizon ** (1.0 / 3.0)))


def default_fotzo_delta(horizon: int, inner_radius: float) -> float:
    return min(horizon ** -0.25, 0.5 * inner_radius)


def default_stb_delta(horizon: int, inner_radius: float) -> float:
    return min(1.0 / horizon, 0.5 * inner_radius)


@dataclass
class RunRecord:
    """Per-round trace of one run."""

    rewards: np.ndarray
    query_counts: np.ndarray
    played: np.ndarray
    queries_trivial: bool  # True iff every query point equals the played point
    meta: dict = field(default_factory=dict)
    base_actions: np.ndarray | None = None       # learner iterates (instrumented)
    surrogate_vectors: np.ndarray | None = None  # exact grad F at the iterates

    def __post_init__(self):
        T = len(self.rewards)
        if len(self.query_counts) != T or len(self.played) != T:
            raise ValueError("trace arrays must all have length T")
        if np.any(self.query_counts < 1):
            raise ValueError("every round must make at least one query")
        if np.any(self.rewards < -1e-12):
            raise ValueError("rewards must be nonnegative")


def unit_sphere_sample(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized Gaussian sample; shared by all smoothing wrappers."""
    while True:
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def ombq_round(learner, ctx: SurrogateContext, oracle,
               rng: np.random.Generator):
    """One round of the first-order full-information reduction.

    Returns (played, reward, queries).  `oracle` must be bound to the
    current round's objective (gradient(x) -> vector, .queries counter).
    """
    x = learner.next_action()
    played = h_map(x)
    before = oracle.queries
    g = bqnd_estimate(ctx, x, oracle, rng)
    learner.feed(g)
    reward = ctx.objective.value(played)
    return played, reward, oracle.queries - before


def run_first_order_full(adversary, dom: Domain, learner,
                         rng: np.random.Generator,
                         instrument: bool = False,
                         quad_nodes: int = 128) -> RunRecord:
    T = adversary.horizon
    d = dom.dim
    rewards = np.empty(T)
    played = np.empty((T, d))
    actions = np.empty((T, d)) if instrument else None
    svecs = np.empty((T, d)) if instrument else None
    oracle = adversary.first_order_oracle()
    for t in range(T):
        oracle.bind(t)
        x = learner.next_action()
        assert dom.contains(x), "infeasible learner action"
        p = h_map(x)
        z = sample_z(float(rng.random())).z
        damp = np.exp(-z * x)
        v = oracle.gradient(1.0 - damp)
        learner.feed(v * damp)
        rewards[t] = adversary.value(t, p)
        played[t] = p
        if instrument:
            actions[t] = x
            ctx = adversary.surrogate_context(t, quad_nodes)
            svecs[t] = grad_F_quadrature(ctx, x)
    return RunRecord(rewards, np.ones(T, dtype=int), played,
                     queries_trivial=False,
                     meta={"mode": "first_full", "T": T},
                     base_actions=actions, surrogate_vectors=svecs)


def run_semi_bandit(adversary, dom: Domain, learner, L: int,
                    rng: np.random.Generator) -> RunRecord:
    """Blocked reduction with trivial first-order queries.

    A partial final block replays the last committed action every round (the
    learner is not updated from it); the oracle is still queried once per
    round at the played point.
    """
    T = adversary.horizon
    d = dom.dim
    rewards = np.empty(T)
    played = np.empty((T, d))
    oracle = adversary.first_order_oracle()
    n_blocks = T // L
    t = 0
    action = h_map(learner.next_action()) if n_blocks == 0 else None
    for q in range(n_blocks):
        x_q = learner.next_action()
        assert dom.contains(x_q)
        action = h_map(x_q)
        z = sample_z(float(rng.random())).z
        damp = np.exp(-z * x_q)
        query_point = 1.0 - damp
        j = int(rng.integers(L))  # uniformly placed query round within the block
        estimate = None
        for pos in range(L):
            p = query_point if pos == j else action
            oracle.bind(t)
            obs = oracle.gradient(p)
            if pos == j:
                estimate = obs * damp
            rewards[t] = adversary.value(t, p)
            played[t] = p
            t += 1
        learner.feed(estimate)
    while t < T:  # partial final block
        oracle.bind(t)
        oracle.gradient(action)
        rewards[t] = adversary.value(t, action)
        played[t] = action
        t += 1
    assert oracle.queries == T
    return RunRecord(rewards, np.ones(T, dtype=int), played,
                     queries_trivial=True,
                     meta={"mode": "semi_bandit", "T": T, "L": L})


def run_zeroth_full(adversary, dom: Domain, learner, delta: float,
                    rng: np.random.Generator) -> RunRecord:
    """One-point sphere-smoothed gradient estimates in place of first-order
    queries; the learner operates on the shrunk domain.

    Query points are retracted into the shrunk set before perturbation so
    that every query stays feasible in the unshrunk domain.
    """
    T = adversary.horizon
    d = dom.dim
    shrunk = learner.domain
    if not isinstance(shrunk, ShrunkDomain):
        raise ValueError("zeroth_full requires a learner on the shrunk domain")
    rewards = np.empty(T)
    played = np.empty((T, d))
    oracle = adversary.zeroth_order_oracle()
    scale = d / delta
    for t in range(T):
        oracle.bind(t)
        x = learner.next_action()
        p = h_map(x)
        z = sample_z(float(rng.random())).z
        damp = np.exp(-z * x)
        v = unit_sphere_sample(rng, d)
        qpt = shrunk.retract(1.0 - damp) + delta * v
        assert dom.contains(qpt), "smoothed query left the domain"
        o = oracle.value(qpt)
        learner.feed((scale * o * v) * damp)
        rewards[t] = adversary.value(t, p)
        played[t] = p
    return RunRecord(rewards, np.ones(T, dtype=int), played,
                     queries_trivial=False,
                     meta={"mode": "zeroth_full", "T": T, "delta_smooth": delta})


def run_bandit(adversary, dom: Domain, learner, L: int, delta: float,
               rng: np.random.Generator) -> RunRecord:
    """Blocking plus sphere smoothing with trivial value queries.

    The inner action (block action or block query point) is retracted into
    the shrunk set and perturbed; the played point is the query point.
    """
    T = adversary.horizon
    d = dom.dim
    shrunk = learner.domain
    if not isinstance(shrunk, ShrunkDomain):
        raise ValueError("bandit requires a learner on the shrunk domain")
    rewards = np.empty(T)
    played = np.empty((T, d))
    oracle = adversary.zeroth_order_oracle()
    scale = d / delta
    n_blocks = T // L
    t = 0
    action = h_map(learner.next_action()) if n_blocks == 0 else None

    def play(point_inner: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        v = unit_sphere_sample(rng, d)
        p = shrunk.retract(point_inner) + delta * v
        assert dom.contains(p), "perturbed play left the domain"
        oracle.bind(t)
        return p, v, oracle.value(p)

    for q in range(n_blocks):
        x_q = learner.next_action()
        action = h_map(x_q)
        z = sample_z(float(rng.random())).z
        damp = np.exp(-z * x_q)
        query_point = 1.0 - damp
        j = int(rng.integers(L))
        estimate = None
        for pos in range(L):
            inner = query_point if pos == j else action
            p, v, o = play(inner)
            if pos == j:
                estimate = (scale * o * v) * damp
            rewards[t] = adversary.value(t, p)
            played[t] = p
            t += 1
        learner.feed(estimate)
    while t < T:
        p, _, _ = play(action)
        rewards[t] = adversary.value(t, p)
        played[t] = p
        t += 1
    assert oracle.queries == T
    return RunRecord(rewards, np.ones(T, dtype=int), played,
                     queries_trivial=True,
                     meta={"mode": "bandit", "T": T, "L": L,
                           "delta_smooth": delta})
