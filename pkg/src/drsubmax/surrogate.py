"""Exponential reparameterization, surrogate potential, and the single-query
gradient estimator.

The surrogate potential is
    F(x) = int_0^1 e^{z-1} / ((1 - e^{-1}) z) * (f(1 - e^{-z x}) - f(0)) dz
with gradient
    grad F(x) = int_0^1 e^{z-1} / (1 - e^{-1}) * (grad f(1 - e^{-z x}) .* e^{-z x}) dz.
The density p(z) = e^{z-1} / (1 - e^{-1}) on [0,1] admits the closed-form
inverse CDF used by the sampler, and the one-query estimator
    g = grad f(1 - e^{-z x}) .* e^{-z x},   z ~ p,
is an unbiased, norm-nonincreasing estimate of grad F(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .objectives import Quadratic, StochasticOracle

ALPHA = 1.0 / math.e          # approximation coefficient
BETA = 1.0 - math.exp(-1.0)   # scaling parameter

_E_INV = math.exp(-1.0)
_Z_LIMIT = 1e-6  # below this the F integrand is replaced by its z->0 limit


@dataclass(frozen=True)
class ZSample:
    z: float
    u: float  # underlying uniform draw, kept for reproducibility


def sample_z(u: float) -> ZSample:
    """Inverse-CDF sample of the density e^{z-1}/(1-e^{-1}) on [0,1]."""
    if not (0 <= u < 1):
        raise ValueError("u must lie in [0, 1)")
    z = 1.0 + math.log(_E_INV + u * (1.0 - _E_INV))
    return ZSample(z=z, u=u)


def z_cdf(z):
    """Analytic CDF (e^{z-1} - e^{-1}) / (1 - e^{-1})."""
    return (np.exp(np.asarray(z) - 1.0) - _E_INV) / (1.0 - _E_INV)


def h_map(x: np.ndarray) -> np.ndarray:
    """Coordinatewise 1 - e^{-x}; never exceeds x, so it stays in any
    down-closed set containing x."""
    return -np.expm1(-np.asarray(x, float))


def h_z_map(x: np.ndarray, z: float) -> np.ndarray:
    """Coordinatewise 1 - e^{-z x}."""
    return -np.expm1(-z * np.asarray(x, float))


def prob_sum(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Probabilistic sum: 1 - (1-x)(1-y), coordinatewise."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return 1.0 - (1.0 - x) * (1.0 - y)


@dataclass
class SurrogateContext:
    """Quadrature-backed access to F and grad F for one objective."""

    objective: Quadratic
    quad_nodes: int = 128
    _nodes: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.quad_nodes < 64:
            raise ValueError("quad_nodes must be >= 64")
        nodes, weights = np.polynomial.legendre.leggauss(self.quad_nodes)
        # map from [-1, 1] to [0, 1]
        self._nodes = 0.5 * (nodes + 1.0)
        self._weights = 0.5 * weights

    @property
    def alpha(self) -> float:
        return ALPHA

    @property
    def beta(self) -> float:
        return BETA


def grad_F_quadrature(ctx: SurrogateContext, x) -> np.ndarray:
    """Gauss-Legendre quadrature of the grad F integrand."""
    x = np.asarray(x, float)
    z = ctx._nodes[:, None]
    damp = np.exp(-z * x[None, :])                       # (n, d)
    grads = ctx.objective.gradient_many(1.0 - damp)      # (n, d)
    density = np.exp(ctx._nodes - 1.0) / (1.0 - _E_INV)  # (n,)
    return (ctx._weights * density) @ (grads * damp)


def F_quadrature(ctx: SurrogateContext, x) -> float:
    """Quadrature value of F; the removable z->0 singularity is replaced by
    its analytic limit (e^{-1}/(1-e^{-1})) <grad f(0), x>."""
    x = np.asarray(x, float)
    f = ctx.objective
    f0 = float(f.a @ np.zeros_like(x))  # f(0) = 0 for this family; kept explicit
    z = ctx._nodes
    small = z < _Z_LIMIT
    vals = f.value_many(1.0 - np.exp(-z[:, None] * x[None, :])) - f0
    integrand = np.empty_like(z)
    nz = ~small
    integrand[nz] = np.exp(z[nz] - 1.0) / ((1.0 - _E_INV) * z[nz]) * vals[nz]
    if small.any():
        integrand[small] = _E_INV / (1.0 - _E_INV) * float(f.gradient_many(
            np.zeros((1, x.size)))[0] @ x)
    return float(ctx._weights @ integrand)


def bqnd_estimate(ctx: SurrogateContext, x, oracle: StochasticOracle,
                  rng: np.random.Generator) -> np.ndarray:
    """One-query estimator: sample z, query grad f at 1 - e^{-z x}, and
    rescale by the Jacobian factor e^{-z x}."""
    x = np.asarray(x, float)
    zs = sample_z(float(rng.random()))
    damp = np.exp(-zs.z * x)
    v = oracle.gradient(1.0 - damp)
    return v * damp


def bqnd_estimate_batch(ctx: SurrogateContext, x, n: int,
                        rng: np.random.Generator,
                        noise_sigma: float = 0.0,
                        sign: float = 1.0) -> np.ndarray:
    """Vectorized Monte-Carlo draws of the estimator (noiseless objective
    gradient plus optional uniform noise); same math as bqnd_estimate, used
    by certification sweeps.  sign=-1 is a test-only negative control."""
    x = np.asarray(x, float)
    u = rng.random(n)
    z = 1.0 + np.log(_E_INV + u * (1.0 - _E_INV))
    damp = np.exp(-z[:, None] * x[None, :])  # (n, d)
    grads = ctx.objective.gradient_many(1.0 - damp)
    if noise_sigma > 0:
        half = noise_sigma * math.sqrt(3.0)
        grads = grads + rng.uniform(-half, half, grads.shape)
    return grads * (sign * damp)


def certify_union_bound(ctx: SurrogateContext, x, y, z: float) -> float:
    """Slack of f(h_z(x) (+) y) >= e^{-z * max(x)} f(y); passes iff >= -1e-9."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    f = ctx.objective
    lhs = f.value(prob_sum(h_z_map(x, z), y))
    xbar = float(x.max())
    return lhs - math.exp(-z * xbar) * f.value(y)


def certify_linearization(ctx: SurrogateContext, x, y) -> float:
    """Gap of (1/e) f(y) - f(h(x)) <= (1-1/e) <grad F(x), y - x>;
    passes iff >= -1e-8 (quadrature-mediated tolerance)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    f = ctx.objective
    rhs = BETA * float(grad_F_quadrature(ctx, x) @ (y - x))
    lhs = ALPHA * f.value(y) - f.value(h_map(x))
    return rhs - lhs
