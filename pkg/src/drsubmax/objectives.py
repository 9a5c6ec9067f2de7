"""Non-negative non-monotone DR-submodular test objectives and their oracles.

The test family is f(x) = <a, x> - (1/2) x^T W x with W symmetric and
entrywise nonnegative (all Hessian entries <= 0, hence DR-submodular).
Non-negativity on the box is guaranteed by a_i >= (1/2) sum_j W_ij, and
non-monotonicity by at least one coordinate with a_i < sum_j W_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain

BOX_TOL = 1e-9


class OutOfBoxError(ValueError):
    pass


def _check_box(x: np.ndarray, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"expected shape ({dim},), got {x.shape}")
    if np.any(x < -BOX_TOL) or np.any(x > 1 + BOX_TOL):
        raise OutOfBoxError(f"point outside [0,1]^{dim}: {x}")
    return x


class Quadratic:
    """f(x) = <a, x> - (1/2) x^T W x on [0,1]^d.

    require_nonmonotone=False admits monotone members of the class (e.g.
    linear objectives used to instrument the regret-transfer inequality).
    """

    def __init__(self, a, W, kind: str = "NonMonotoneQuadratic",
                 require_nonmonotone: bool = True):
        a = np.asarray(a, dtype=float)
        W = np.asarray(W, dtype=float)
        if a.ndim != 1 or W.shape != (a.size, a.size):
            raise ValueError("a must be a vector and W a matching square matrix")
        if np.any(W < 0):
            raise ValueError("W must be entrywise nonnegative (DR-submodularity)")
        if not np.allclose(W, W.T):
            raise ValueError("W must be symmetric")
        row = W.sum(axis=1)
        if np.any(a < 0.5 * row - 1e-12):
            raise ValueError("need a_i >= (1/2) sum_j W_ij for non-negativity")
        if require_nonmonotone and not np.any(a < row - 1e-12):
            raise ValueError("need some a_i < sum_j W_ij for non-monotonicity")
        self.a = a
        self.W = W
        self.kind = kind
        self._row = row

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def lipschitz_m1(self) -> float:
        # gradient range over the box is [a - W1, a]; max over the two corners
        return float(max(np.linalg.norm(self.a), np.linalg.norm(self.a - self._row)))

    @property
    def smooth_l(self) -> float:
        return float(np.linalg.norm(self.W, 2))

    def value(self, x) -> float:
        x = _check_box(x, self.dim)
        return float(self.a @ x - 0.5 * x @ self.W @ x)

    def gradient(self, x) -> np.ndarray:
        x = _check_box(x, self.dim)
        return self.a - self.W @ x

    def value_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, float)
        return X @ self.a - 0.5 * np.einsum("ti,ij,tj->t", X, self.W, X)

    def gradient_many(self, X: np.ndarray) -> np.ndarray:
        return self.a - np.asarray(X, float) @ self.W


def separable(dim: int) -> Quadratic:
    """The separable instance f(x) = sum_i (x_i - x_i^2)."""
    return Quadratic(np.ones(dim), 2 * np.eye(dim), kind="Separable1D")


@dataclass(frozen=True)
class OracleSpec:
    order: str  # 'first' | 'zeroth'
    noise_sigma: float = 0.0
    clip_B: float | None = None  # default set from the objective at binding time
    rng_seed: int = 0

    def __post_init__(self):
        if self.order not in ("first", "zeroth"):
            raise ValueError("order must be 'first' or 'zeroth'")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


class StochasticOracle:
    """Seeded unbiased oracle with deterministically bounded output.

    Noise is coordinatewise uniform on [-sigma*sqrt(3), sigma*sqrt(3)]
    (variance sigma^2), so the norm bound holds on every draw and the
    defensive clip below never actually fires.
    """

    def __init__(self, objective: Quadratic, spec: OracleSpec):
        self.objective = objective
        self.spec = spec
        self.rng = np.random.default_rng(spec.rng_seed)
        self.queries = 0
        half = spec.noise_sigma * math.sqrt(3.0)
        self._half_width = half
        if spec.clip_B is not None:
            self.clip_B = spec.clip_B
        elif spec.order == "first":
            self.clip_B = objective.lipschitz_m1 + half * math.sqrt(objective.dim)
        else:
            # |f| <= <a, 1> on the box for this family
            self.clip_B = float(objective.a.sum()) + half

    def gradient(self, x) -> np.ndarray:
        if self.spec.order != "first":
            raise ValueError("gradient requires a first-order oracle")
        self.queries += 1
        g = self.objective.gradient(x)
        if self._half_width > 0:
            g = g + self.rng.uniform(-self._half_width, self._half_width, g.size)
        n = np.linalg.norm(g)
        if n > self.clip_B:
            g = g * (self.clip_B / n)
        return g

    def value(self, x) -> float:
        if self.spec.order != "zeroth":
            raise ValueError("value requires a zeroth-order oracle")
        self.queries += 1
        v = self.objective.value(x)
        if self._half_width > 0:
            v += float(self.rng.uniform(-self._half_width, self._half_width))
        return float(np.clip(v, -self.clip_B, self.clip_B))


@dataclass
class BenchmarkResult:
    x: np.ndarray
    value: float  # per-function average value at x (lower bound on the max)
    error_bound: float  # additive grid-resolution bound; 0 for ascent-only


def _mean_objective(fs) -> Quadratic:
    fs = list(fs)
    if not fs:
        raise ValueError("empty objective sequence")
    a = np.mean([f.a for f in fs], axis=0)
    W = np.mean([f.W for f in fs], axis=0)
    return Quadratic(a, W, require_nonmonotone=False)

def projected_ascent(f: Quadratic, dom: Domain, x0: np.ndarray,
                     iters: int = 400) -> np.ndarray:
    step = 1.0 / max(f.smooth_l, 1e-6)
    x = np.asarray(x0, float)
    for _ in range(iters):
        x = dom.euclidean_project(x + step * (f.a - f.W @ x))
    return x


def offline_benchmark(fs, dom: Domain, grid_step: float = 1.0 / 50,
                      n_starts: int = 32, seed: int = 0) -> BenchmarkResult:
    """Approximate argmax over dom of the average of the quadratics fs.

    Exact grid + local polish for d <= 4, multistart projected gradient
    ascent for 4 < d <= 8.  The reported value is a lower bound on the max.
    """
    fbar = _mean_objective(fs)
    d = fbar.dim
    if d > 8:
        raise ValueError("offline benchmark supports d <= 8 only")
    rng = np.random.default_rng(seed)
    if d <= 4:
        axes = [np.arange(0.0, 1.0 + grid_step / 2, grid_step)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        feasible = grid[dom.contains_many(grid)]
        vals = feasible @ fbar.a - 0.5 * np.einsum("ti,ij,tj->t", feasible, fbar.W, feasible)
        order = np.argsort(vals)[::-1]
        starts = feasible[order[:8]]
        err = fbar.lipschitz_m1 * grid_step * math.sqrt(d) / 2
    else:
        starts = rng.uniform(0, 1, (n_starts, d))
        starts = np.array([dom.euclidean_project(s) for s in starts])
        err = 0.0
    best_x, best_v = None, -np.inf
    for s in starts:
        x = projected_ascent(fbar, dom, s)
        v = float(fbar.a @ x - 0.5 * x @ fbar.W @ x)
        if v > best_v:
            best_x, best_v = x, v
    return BenchmarkResult(best_x, best_v, err)
