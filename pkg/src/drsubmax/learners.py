"""Online linear base learners: separation-oracle gradient ascent (with the
infeasible-projection subroutine) and the expert-ensemble dynamic learner.

Both maximize: feed() receives reward vectors, and the expert ensemble's
exponential weights consume the negated linearized reward as its loss.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Domain


class SoIpIterationCap(RuntimeError):
    """The separation-guided walk failed to re-enter the set; signals an
    inconsistent domain specification."""


def so_ip_path(dom: Domain, y0, delta: float) -> list[np.ndarray]:
    """Infeasible projection via separation oracle; returns the iterate path.

    Projects onto the affine hull, clips into the radius-D ball around the
    center, then walks steps of exact length delta along the normalized
    projected separating direction until membership holds.
    """
    r = dom.inner_radius
    if not (0 < delta < r):
        raise ValueError(f"need 0 < delta < r={r}, got {delta}")
    y = dom.affine_project(np.asarray(y0, float))
    dist = np.linalg.norm(y - dom.center)
    if dist > dom.diameter:
        y = dom.center + (y - dom.center) / (dist / dom.diameter)
    path = [y]
    cap = math.ceil((2 * dom.diameter / delta) ** 2) + 10
    for _ in range(cap):
        g = dom.separate(y)
        if g is None:
            return path
        g = dom.affine_project(g)  # projection onto hull directions (identity here)
        y = y - delta * g / np.linalg.norm(g)
        path.append(y)
    raise SoIpIterationCap(f"no membership after {cap} steps (delta={delta})")


def so_ip(dom: Domain, y0, delta: float) -> np.ndarray:
    return so_ip_path(dom, y0, delta)[-1]


class SoOga:
    """Online gradient ascent with infeasible projection.

    Step size eta = v*r/(2*M1) * T^{-1/2} and walk length delta = v * T^{-1/2}
    for a free parameter v > 0 with delta in (0, 1) and delta < r.
    """

    name = "so_oga"

    def __init__(self, domain: Domain, horizon: int, m1: float, v: float = 0.5):
        if horizon < 1:
            raise ValueError("horizon must be positive")
        delta = v / math.sqrt(horizon)
        if not (0 < delta < 1) or delta >= domain.inner_radius:
            raise ValueError(
                f"v={v} gives delta={delta:.4g}; need delta in (0,1) and < r")
        self.domain = domain
        self.horizon = horizon
        self.eta = v * domain.inner_radius / (2 * m1) / math.sqrt(horizon)
        self.delta = delta
        self.x = domain.center.copy()

    def next_action(self) -> np.ndarray:
        return self.x

    def feed(self, reward: np.ndarray) -> None:
        self.x = so_ip(self.domain, self.x + self.eta * np.asarray(reward, float),
                       self.delta)


class ImprovedAder:
    """Expert ensemble over a geometric step-size grid with exponential
    meta-weights, for dynamic regret against drifting comparators.

    Grid: eta_i = 2^{i-1} (D/M1) sqrt(7/(2T)), i = 1..N,
    N = ceil(0.5*log2(1 + 4T/7)) + 1, meta rate lambda = sqrt(2/(T M1^2 D^2)),
    initial weights w_i = C/(i(i+1)) with C = 1 + 1/N (these sum to one).
    """

    name = "ader"

    def __init__(self, domain: Domain, horizon: int, m1: float,
                 expert_projection: str = "exact", so_ip_delta: float | None = None):
        if expert_projection not in ("exact", "so_ip"):
            raise ValueError("expert_projection must be 'exact' or 'so_ip'")
        self.domain = domain
        self.horizon = horizon
        D = domain.diameter
        N = math.ceil(0.5 * math.log2(1 + 4 * horizon / 7)) + 1
        base = (D / m1) * math.sqrt(7.0 / (2 * horizon))
        self.etas = np.array([2.0 ** (i - 1) * base for i in range(1, N + 1)])
        self.lam = math.sqrt(2.0 / (horizon * m1 ** 2 * D ** 2))
        C = 1.0 + 1.0 / N
        i = np.arange(1, N + 1)
        self.weights = C / (i * (i + 1.0))
        self.weights /= self.weights.sum()  # exact normalization vs roundoff
        self.experts = np.tile(domain.center, (N, 1))
        self.expert_projection = expert_projection
        self.so_ip_delta = so_ip_delta or 0.5 * domain.inner_radius / math.sqrt(horizon)
        self._last_played: np.ndarray | None = None

    def next_action(self) -> np.ndarray:
        self._last_played = self.weights @ self.experts
        return self._last_played

    def feed(self, reward: np.ndarray) -> None:
        o = np.asarray(reward, float)
        played = self._last_played if self._last_played is not None \
            else self.weights @ self.experts
        # loss of expert i is the negated linearized reward at its point
        losses = -(self.experts - played) @ o
        shifted = -self.lam * (losses - losses.min())  # rescale before exp
        w = self.weights * np.exp(shifted)
        self.weights = w / w.sum()
        if self.expert_projection == "exact":
            self.experts = self.domain.euclidean_project_many(
                self.experts + self.etas[:, None] * o)
        else:
            for i in range(self.experts.shape[0]):
                self.experts[i] = so_ip(
                    self.domain, self.experts[i] + self.etas[i] * o,
                    self.so_ip_delta)
        self._last_played = None


def make_learner(kind: str, domain: Domain, horizon: int, m1: float,
                 v: float = 0.5, expert_projection: str = "exact"):
    kind = kind.lower()
    if kind == "so_oga":
        return SoOga(domain, horizon, m1, v=v)
    if kind == "ader":
        return ImprovedAder(domain, horizon, m1, expert_projection=expert_projection)
    raise ValueError(f"unknown learner kind {kind!r}")
