"""Down-closed convex domains in [0,1]^d and their oracles.

Every domain exposes membership, linear optimization, separation, exact
Euclidean projection (reference oracle), affine-hull projection, and
shrinking toward an interior center.  All domains here are full-dimensional,
so the affine-hull projection is the identity; it is kept in the interface
because the infeasible-projection subroutine is written against it.
"""

from __future__ import annotations

import math

import numpy as np

MEMBERSHIP_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


def _check_dim(dom: "Domain", x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dom.dim,):
        raise DimensionMismatch(f"expected shape ({dom.dim},), got {x.shape}")
    return x


class Domain:
    """Base class; concrete domains fill in kind-specific constraints."""

    kind: str
    dim: int
    center: np.ndarray
    inner_radius: float
    diameter: float

    # -- membership ---------------------------------------------------------

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def contains_many(self, X: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Vectorized membership for an (n, d) array of points."""
        return np.array([self.contains(row, tol) for row in np.asarray(X, float)])

    # -- oracles -------------------------------------------------------------

    def linear_maximize(self, c) -> np.ndarray:
        raise NotImplementedError

    def separate(self, y, tol: float = MEMBERSHIP_TOL):
        """Return None if y is inside, else a separating direction g with
        <g, y - x> > 0 for every feasible x."""
        raise NotImplementedError

    def euclidean_project(self, y) -> np.ndarray:
        raise NotImplementedError

    def euclidean_project_many(self, Y: np.ndarray) -> np.ndarray:
        """Vectorized projection for an (n, d) array of points."""
        return np.array([self.euclidean_project(row) for row in np.asarray(Y, float)])

    def affine_project(self, y) -> np.ndarray:
        return _check_dim(self, y)

    def shrink(self, delta: float) -> "Domain":
        if delta < 0 or delta >= self.inner_radius:
            raise ValueError(f"shrink requires 0 <= delta < r={self.inner_radius}")
        if delta == 0:
            return self
        return ShrunkDomain(self, delta)


class Box(Domain):
    """The unit box [0,1]^d."""

    kind = "box"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.center = np.full(dim, 0.5)
        self.inner_radius = 0.5
        self.diameter = math.sqrt(dim)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = _check_dim(self, x)
        return bool(np.all(x >= -tol) and np.all(x <= 1 + tol))

    def contains_many(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        X = np.asarray(X, float)
        return np.all((X >= -tol) & (X <= 1 + tol), axis=1)

    def linear_maximize(self, c) -> np.ndarray:
        c = _check_dim(self, c)
        return (c > 0).astype(float)

    def separate(self, y, tol: float = MEMBERSHIP_TOL):
        y = _check_dim(self, y)
        if self.contains(y, tol):
            return None
        over = y - 1.0
        under = -y
        g = np.zeros(self.dim)
        if over.max() >= under.max():
            g[int(np.argmax(over))] = 1.0
        else:
            g[int(np.argmax(under))] = -1.0
        return g

    def euclidean_project(self, y) -> np.ndarray:
        y = _check_dim(self, y)
        return np.clip(y, 0.0, 1.0)

    def euclidean_project_many(self, Y) -> np.ndarray:
        return np.clip(np.asarray(Y, float), 0.0, 1.0)


class ScaledBox(Domain):
    """The scaled box s * [0,1]^d with s in (0,1]."""

    kind = "scaled_box"

    def __init__(self, dim: int, scale: float):
        if dim < 1:
            raise ValueError("dim must be positive")
        if not (0 < scale <= 1):
            raise ValueError("scale must lie in (0, 1]")
        self.dim = dim
        self.scale = float(scale)
        self.center = np.full(dim, scale / 2)
        self.inner_radius = scale / 2
        self.diameter = scale * math.sqrt(dim)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = _check_dim(self, x)
        return bool(np.all(x >= -tol) and np.all(x <= self.scale + tol))

    def contains_many(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        X = np.asarray(X, float)
        return np.all((X >= -tol) & (X <= self.scale + tol), axis=1)

    def linear_maximize(self, c) -> np.ndarray:
        c = _check_dim(self, c)
        return self.scale * (c > 0).astype(float)

    def separate(self, y, tol: float = MEMBERSHIP_TOL):
        y = _check_dim(self, y)
        if self.contains(y, tol):
            return None
        over = y - self.scale
        under = -y
        g = np.zeros(self.dim)
        if over.max() >= under.max():
            g[int(np.argmax(over))] = 1.0
        else:
            g[int(np.argmax(under))] = -1.0
        return g

    def euclidean_project(self, y) -> np.ndarray:
        y = _check_dim(self, y)
        return np.clip(y, 0.0, self.scale)

    def euclidean_project_many(self, Y) -> np.ndarray:
        return np.clip(np.asarray(Y, float), 0.0, self.scale)


class Knapsack(Domain):
    """Single-constraint knapsack {x in [0,1]^d : <w, x> <= b}.

    Requires 0 < b <= <w, 1> (otherwise the budget is vacuous and the set
    is just a box).  The center is (b / (2 <w,1>)) * 1, strictly interior.
    """

    kind = "knapsack"
    PROJECTION_TOL = 1e-10

    def __init__(self, weights, budget: float):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty vector")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("weights must not be all zero")
        if not (0 < budget <= total):
            raise ValueError("budget must satisfy 0 < b <= <w, 1>; use Box otherwise")
        self.dim = w.size
        self.weights = w
        self.budget = float(budget)
        c_val = self.budget / (2 * total)
        self.center = np.full(self.dim, c_val)
        # distance from the center to the nearest facet
        wnorm = float(np.linalg.norm(w))
        facet_dists = [c_val, 1 - c_val, (self.budget - w @ self.center) / wnorm]
        self.inner_radius = float(min(facet_dists))
        # coordinatewise range min(1, b/w_i) upper-bounds pairwise distances
        with np.errstate(divide="ignore"):
            spans = np.minimum(1.0, np.where(w > 0, self.budget / np.where(w > 0, w, 1.0), 1.0))
        self.diameter = float(np.linalg.norm(spans))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = _check_dim(self, x)
        return bool(
            np.all(x >= -tol)
            and np.all(x <= 1 + tol)
            and self.weights @ x <= self.budget + tol
        )

    def contains_many(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        X = np.asarray(X, float)
        box = np.all((X >= -tol) & (X <= 1 + tol), axis=1)
        return box & (X @ self.weights <= self.budget + tol)

    def linear_maximize(self, c) -> np.ndarray:
        c = _check_dim(self, c)
        x = np.zeros(self.dim)
        w = self.weights
        # zero-weight items with positive profit are free
        free = (c > 0) & (w == 0)
        x[free] = 1.0
        idx = np.nonzero((c > 0) & (w > 0))[0]
        if idx.size:
            order = idx[np.argsort(-c[idx] / w[idx])]
            remaining = self.budget
            for i in order:
                if remaining <= 0:
                    break
                take = min(1.0, remaining / w[i])
                x[i] = take
                remaining -= take * w[i]
        return x

    def separate(self, y, tol: float = MEMBERSHIP_TOL):
        y = _check_dim(self, y)
        if self.contains(y, tol):
            return None
        over = y - 1.0
        under = -y
        budget_excess = float(self.weights @ y - self.budget)
        worst_box = max(over.max(), under.max())
        if budget_excess > worst_box:
            return self.weights.copy()
        g = np.zeros(self.dim)
        if over.max() >= under.max():
            g[int(np.argmax(over))] = 1.0
        else:
            g[int(np.argmax(under))] = -1.0
        return g

    def euclidean_project(self, y) -> np.ndarray:
        y = _check_dim(self, y)
        x = np.clip(y, 0.0, 1.0)
        if self.weights @ x <= self.budget + self.PROJECTION_TOL:
            return x
        # dual bisection on lambda >= 0 for x(lambda) = clip(y - lambda w, 0, 1)
        w = self.weights

        def excess(lam: float) -> float:
            return float(w @ np.clip(y - lam * w, 0.0, 1.0) - self.budget)

        lo, hi = 0.0, 1.0
        it = 0
        while excess(hi) > 0:
            hi *= 2.0
            it += 1
            if it > 200:
                raise RuntimeError("knapsack projection failed to bracket the dual")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if excess(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return np.clip(y - hi * w, 0.0, 1.0)

    def euclidean_project_many(self, Y) -> np.ndarray:
        # x(lam) = clip(y - lam*w, 0, 1) makes the dual excess
        # w.x(lam) - b piecewise linear and nonincreasing in lam, with
        # breakpoints (y_i - 1)/w_i and y_i/w_i; solve the crossing exactly.
        Y = np.asarray(Y, float)
        X = np.minimum(np.maximum(Y, 0.0), 1.0)
        w = self.weights
        bad = X @ w > self.budget + self.PROJECTION_TOL
        if not bad.any():
            return X
        Yb = Y[bad]
        n = Yb.shape[0]
        pos = w > 0
        wp = w[pos]
        with np.errstate(divide="ignore"):
            bps = np.concatenate([(Yb[:, pos] - 1.0) / wp, Yb[:, pos] / wp],
                                 axis=1)
        bps = np.maximum(bps, 0.0)
        bps.sort(axis=1)
        # excess at every breakpoint: (n, k)
        Z = np.minimum(np.maximum(Yb[:, None, :] - bps[:, :, None] * w, 0.0),
                       1.0)
        E = Z @ w - self.budget
        # last breakpoint with positive excess; interpolate on the linear
        # piece that follows it (active set evaluated at the piece midpoint)
        idx = (E > 0).sum(axis=1) - 1
        rows = np.arange(n)
        lam0 = np.where(idx >= 0, bps[rows, np.maximum(idx, 0)], 0.0)
        e0 = np.where(idx >= 0, E[rows, np.maximum(idx, 0)],
                      X[bad] @ w - self.budget)
        lam1 = bps[rows, np.minimum(idx + 1, bps.shape[1] - 1)]
        mid = Yb - (0.5 * (lam0 + lam1))[:, None] * w
        active = (mid > 0.0) & (mid < 1.0) & pos
        slope = (active * w ** 2).sum(axis=1)
        lam = lam0 + e0 / np.where(slope > 0, slope, 1.0)
        X[bad] = np.minimum(np.maximum(Yb - lam[:, None] * w, 0.0), 1.0)
        return X


class ShrunkDomain(Domain):
    """The base domain scaled toward its center: {c + (1-delta/r)(x-c)}.

    Every member is at least delta deep inside the base domain.  Not
    down-closed in general; used only as the working set of learners.
    """

    kind = "shrunk"

    def __init__(self, base: Domain, delta: float):
        self.base = base
        self.delta = float(delta)
        self.gamma = 1.0 - delta / base.inner_radius
        self.dim = base.dim
        self.center = base.center.copy()
        self.inner_radius = base.inner_radius - delta
        self.diameter = self.gamma * base.diameter

    def _to_base(self, x: np.ndarray) -> np.ndarray:
        return self.center + (x - self.center) / self.gamma

    def _from_base(self, x: np.ndarray) -> np.ndarray:
        return self.center + self.gamma * (x - self.center)

    def retract(self, x) -> np.ndarray:
        """Map a point of the base domain into the shrunk set."""
        return self._from_base(_check_dim(self, x))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = _check_dim(self, x)
        return self.base.contains(self._to_base(x), tol / self.gamma)

    def contains_many(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        X = np.asarray(X, float)
        mapped = self.center + (X - self.center) / self.gamma
        return self.base.contains_many(mapped, tol / self.gamma)

    def linear_maximize(self, c) -> np.ndarray:
        c = _check_dim(self, c)
        return self._from_base(self.base.linear_maximize(c))

    def separate(self, y, tol: float = MEMBERSHIP_TOL):
        y = _check_dim(self, y)
        if self.contains(y, tol):
            return None
        g = self.base.separate(self._to_base(y), tol=0.0)
        if g is None:  # borderline point: fall back to the ray from the center
            g = y - self.center
        return g

    def euclidean_project(self, y) -> np.ndarray:
        # isotropic scaling about c commutes with nearest-point projection
        y = _check_dim(self, y)
        return self._from_base(self.base.euclidean_project(self._to_base(y)))

    def euclidean_project_many(self, Y) -> np.ndarray:
        Y = np.asarray(Y, float)
        mapped = self.center + (Y - self.center) / self.gamma
        proj = self.base.euclidean_project_many(mapped)
        return self.center + self.gamma * (proj - self.center)


def make_domain(kind: str, dim: int, *, scale: float | None = None,
                weights=None, budget: float | None = None) -> Domain:
    """Construct a domain from config-style parameters."""
    kind = kind.lower()
    if kind == "box":
        return Box(dim)
    if kind == "scaled_box":
        if scale is None:
            raise ValueError("scaled_box requires scale")
        return ScaledBox(dim, scale)
    if kind == "knapsack":
        if weights is None or budget is None:
            raise ValueError("knapsack requires weights and budget")
        return Knapsack(weights, budget)
    raise ValueError(f"unknown domain kind {kind!r}")
