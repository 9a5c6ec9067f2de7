"""Numerical certification sweeps: sampler exactness, estimator unbiasedness
and boundedness, and the structural inequalities behind the 1/e reduction.

Each check returns a small result record; the CLI's `verify` subcommand and
the acceptance tests both use these entry points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .surrogate import (SurrogateContext, bqnd_estimate_batch,
                        certify_linearization, grad_F_quadrature, h_z_map,
                        prob_sum, sample_z, z_cdf)
from .objectives import Quadratic


def random_instance(dim: int, rng: np.random.Generator,
                    w_diag: float = 2.0, coupling: float = 0.5) -> Quadratic:
    """A random admissible quadratic: W nonnegative symmetric, a placed in
    [row/2, row) so the function is nonnegative on the box yet non-monotone."""
    W = coupling * rng.uniform(0.0, 1.0, (dim, dim))
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, w_diag * rng.uniform(0.5, 1.0, dim))
    row = W.sum(axis=1)
    a = row * rng.uniform(0.5, 0.999, dim)
    return Quadratic(a, W)


@dataclass
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    detail: str = ""


def sampler_ks_check(n: int = 100_000, seed: int = 0,
                     threshold: float = 0.006) -> CheckResult:
    """Kolmogorov-Smirnov distance between sampled z values and the analytic
    CDF of the density e^{z-1}/(1-e^{-1})."""
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    z = np.sort(np.array([sample_z(float(ui)).z for ui in u]))
    cdf = z_cdf(z)
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return CheckResult("sampler_ks", ks, threshold, ks < threshold)


def bqnd_audit(n_instances: int = 20, dim: int = 5, n_draws: int = 100_000,
               quad_nodes: int = 128, seed: int = 0,
               sign: float = 1.0) -> CheckResult:
    """Per-coordinate Monte-Carlo mean of the one-query estimator must sit
    within 4 standard errors of the quadrature gradient, and every draw's
    norm must stay below the Lipschitz bound."""
    rng = np.random.default_rng(seed)
    worst_dev = 0.0
    worst_margin = -np.inf
    for _ in range(n_instances):
        f = random_instance(dim, rng)
        ctx = SurrogateContext(f, quad_nodes)
        x = rng.uniform(0.0, 1.0, dim)
        draws = bqnd_estimate_batch(ctx, x, n_draws, rng, sign=sign)
        target = grad_F_quadrature(ctx, x)
        se = draws.std(axis=0, ddof=1) / math.sqrt(n_draws)
        dev = np.abs(draws.mean(axis=0) - target) / np.maximum(se, 1e-300)
        worst_dev = max(worst_dev, float(dev.max()))
        norms = np.linalg.norm(draws, axis=1)
        worst_margin = max(worst_margin,
                           float(norms.max()) - f.lipschitz_m1)
    passed = worst_dev <= 4.0 and worst_margin <= 1e-9
    return CheckResult("bqnd_unbiased_bounded", worst_dev, 4.0, passed,
                       detail=f"max ||g|| - B1 = {worst_margin:.3e}")


def union_bound_sweep(n_triples: int = 10_000, n_instances: int = 20,
                      dim: int = 5, seed: int = 0,
                      tol: float = -1e-9) -> CheckResult:
    """Min slack of f(h_z(x) (+) y) >= e^{-z max(x)} f(y) over random
    (x, y, z) triples, vectorized per instance."""
    rng = np.random.default_rng(seed)
    min_slack = np.inf
    for _ in range(n_instances):
        f = random_instance(dim, rng)
        X = rng.uniform(0.0, 1.0, (n_triples, dim))
        Y = rng.uniform(0.0, 1.0, (n_triples, dim))
        Z = rng.uniform(0.0, 1.0, n_triples)
        hz = 1.0 - np.exp(-Z[:, None] * X)
        lhs = f.value_many(prob_sum(hz, Y))
        rhs = np.exp(-Z * X.max(axis=1)) * f.value_many(Y)
        min_slack = min(min_slack, float((lhs - rhs).min()))
    return CheckResult("union_lower_bound", min_slack, tol, min_slack >= tol)


def linearization_sweep(n_pairs: int = 10_000, n_instances: int = 20,
                        dim: int = 5, quad_nodes: int = 128, seed: int = 0,
                        tol: float = -1e-8) -> CheckResult:
    """Min gap of (1/e) f(y) - f(h(x)) <= (1-1/e) <grad F(x), y - x> over
    random pairs; the gradient comes from quadrature, hence the looser
    tolerance."""
    rng = np.random.default_rng(seed)
    min_gap = np.inf
    per_instance = max(1, n_pairs // 100)
    for _ in range(n_instances):
        f = random_instance(dim, rng)
        ctx = SurrogateContext(f, quad_nodes)
        # reuse each gradient for a batch of y's: n_pairs total per instance
        n_x = 100
        for _ in range(n_x):
            x = rng.uniform(0.0, 1.0, dim)
            g = grad_F_quadrature(ctx, x)
            Y = rng.uniform(0.0, 1.0, (per_instance, dim))
            rhs = ctx.beta * (Y - x) @ g
            lhs = (ctx.alpha * f.value_many(Y)
                   - f.value(1.0 - np.exp(-x)))
            min_gap = min(min_gap, float((rhs - lhs).min()))
    return CheckResult("linearization_gap", min_gap, tol, min_gap >= tol)


def analytic_gradient_check(quad_nodes: int = 128) -> CheckResult:
    """For f(x) = x - x^2 in one dimension, grad F(1) has the closed form
    (2 e^{-1} (1 - e^{-1}) - e^{-1}) / (1 - e^{-1}); the quadrature must
    reproduce it to 1e-10."""
    f = Quadratic(np.array([1.0]), np.array([[2.0]]), kind="Separable1D")
    ctx = SurrogateContext(f, quad_nodes)
    got = float(grad_F_quadrature(ctx, np.array([1.0]))[0])
    e1 = math.exp(-1.0)
    want = (2.0 * e1 * (1.0 - e1) - e1) / (1.0 - e1)
    err = abs(got - want)
    return CheckResult("analytic_gradient", err, 1e-10, err <= 1e-10,
                       detail=f"got {got:.9f}, want {want:.9f}")


def run_all_checks(quad_nodes: int = 128, seed: int = 0,
                   sabotage_bqnd: bool = False) -> list[CheckResult]:
    return [
        sampler_ks_check(seed=seed),
        analytic_gradient_check(quad_nodes),
        bqnd_audit(quad_nodes=quad_nodes, seed=seed,
                   sign=-1.0 if sabotage_bqnd else 1.0),
        union_bound_sweep(seed=seed),
        linearization_sweep(quad_nodes=quad_nodes, seed=seed),
    ]
