"""Adversary generators, regret metrics, slope fitting, and the experiment
engine that turns a config into persisted traces and regret reports.

All randomness is seeded: the adversary's instance is fixed by its own
instance_seed (shared across repetition seeds), while oracle noise and
wrapper randomness derive from the per-run seed.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import reductions
from .geometry import Domain, make_domain
from .learners import ImprovedAder, SoOga
from .objectives import Quadratic, offline_benchmark
from .surrogate import ALPHA, SurrogateContext

ADVERSARY_KINDS = ("iid_random", "piecewise_stationary", "drifting")


@dataclass(frozen=True)
class AdversarySpec:
    kind: str
    dim: int
    instance_seed: int = 0
    noise_sigma: float = 0.0
    num_segments: int | None = None     # piecewise_stationary; default ceil(T^{1/4})
    drift_rate: float | None = None     # drifting; per-round optimum step length
    w_diag: float = 2.0                 # diagonal of the quadratic coupling matrix
    coupling: float = 0.0               # off-diagonal magnitude (kept diag-dominant)

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.w_diag < 0 or self.coupling < 0:
            raise ValueError("w_diag and coupling must be nonnegative")
        if self.coupling > 0 and self.coupling * (self.dim - 1) >= self.w_diag:
            raise ValueError("coupling must keep W diagonally dominant")


def _random_W(spec: AdversarySpec, rng: np.random.Generator) -> np.ndarray:
    d = spec.dim
    W = np.full((d, d), spec.coupling) * rng.uniform(0.5, 1.0, (d, d))
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, spec.w_diag)
    return W


def _random_a(W: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # a_i in [row_i/2, row_i): non-negative and non-monotone on the box.
    # For the degenerate linear family (W = 0) the scale is simply uniform.
    row = W.sum(axis=1)
    base = np.where(row > 0, row, 1.0)
    return base * rng.uniform(0.5, 0.999, row.size)


class Adversary:
    """A horizon-long sequence of quadratics sharing one coupling matrix W;
    only the linear terms vary round to round."""

    def __init__(self, spec: AdversarySpec, horizon: int,
                 W: np.ndarray, A: np.ndarray,
                 designed_optima: np.ndarray | None = None):
        self.spec = spec
        self.horizon = horizon
        self.W = W
        self.A = A  # (T, d) linear terms
        self.designed_optima = designed_optima
        self._row = W.sum(axis=1)
        self._stationary = bool(np.all(A == A[0]))
        self._ctx_cache: dict = {}
        self.oracle_seed = 0
        norms = np.maximum(np.linalg.norm(A, axis=1),
                           np.linalg.norm(A - self._row, axis=1))
        self.m1 = float(norms.max())
        self.value_bound = float(np.max(A.sum(axis=1)))

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @property
    def designed_path_length(self) -> float | None:
        if self.designed_optima is None:
            return None
        return float(np.linalg.norm(np.diff(self.designed_optima, axis=0),
                                    axis=1).sum())

    def value(self, t: int, x) -> float:
        x = np.asarray(x, float)
        return float(self.A[t] @ x - 0.5 * x @ self.W @ x)

    def gradient(self, t: int, x) -> np.ndarray:
        return self.A[t] - self.W @ np.asarray(x, float)

    def objective_at(self, t: int) -> Quadratic:
        return Quadratic(self.A[t], self.W, require_nonmonotone=False)

    def mean_objective(self, start: int = 0, stop: int | None = None) -> Quadratic:
        stop = self.horizon if stop is None else stop
        return Quadratic(self.A[start:stop].mean(axis=0), self.W,
                         require_nonmonotone=False)

    def surrogate_context(self, t: int, quad_nodes: int = 128) -> SurrogateContext:
        key = 0 if self._stationary else t
        ctx = self._ctx_cache.get((key, quad_nodes))
        if ctx is None:
            ctx = SurrogateContext(self.objective_at(key), quad_nodes)
            self._ctx_cache[(key, quad_nodes)] = ctx
        return ctx

    # -- oracles bound per round ---------------------------------------------

    def first_order_oracle(self) -> "_BoundOracle":
        return _BoundOracle(self, "first", self.oracle_seed)

    def zeroth_order_oracle(self) -> "_BoundOracle":
        return _BoundOracle(self, "zeroth", self.oracle_seed)


class _BoundOracle:
    """Stochastic oracle over the adversary's round objectives, with a query
    counter and a deterministic norm bound."""

    def __init__(self, adversary: Adversary, order: str, seed: int):
        self.adv = adversary
        self.order = order
        self.rng = np.random.default_rng(seed)
        self.queries = 0
        self.t = 0
        half = adversary.spec.noise_sigma * math.sqrt(3.0)
        self._half = half
        d = adversary.dim
        if order == "first":
            self.clip_B = adversary.m1 + half * math.sqrt(d)
        else:
            self.clip_B = adversary.value_bound + half

    def bind(self, t: int) -> None:
        self.t = t

    def gradient(self, x) -> np.ndarray:
        self.queries += 1
        g = self.adv.gradient(self.t, x)
        if self._half > 0:
            g = g + self.rng.uniform(-self._half, self._half, g.size)
        n = np.linalg.norm(g)
        if n > self.clip_B:
            g = g * (self.clip_B / n)
        return g

    def value(self, x) -> float:
        self.queries += 1
        v = self.adv.value(self.t, x)
        if self._half > 0:
            v += float(self.rng.uniform(-self._half, self._half))
        return float(np.clip(v, -self.clip_B, self.clip_B))


def build_adversary(spec: AdversarySpec, horizon: int) -> Adversary:
    rng = np.random.default_rng(spec.instance_seed)
    W = _random_W(spec, rng)
    d = spec.dim
    if spec.kind == "iid_random":
        row = W.sum(axis=1)
        base = np.where(row > 0, row, 1.0)
        A = base * rng.uniform(0.5, 0.999, (horizon, d))
        return Adversary(spec, horizon, W, A)
    if spec.kind == "piecewise_stationary":
        n_seg = spec.num_segments or max(1, math.ceil(horizon ** 0.25))
        seg_len = math.ceil(horizon / n_seg)
        A = np.empty((horizon, d))
        for s in range(n_seg):
            a = _random_a(W, rng)
            A[s * seg_len:(s + 1) * seg_len] = a
        return Adversary(spec, horizon, W, A)
    # drifting: diagonal W so the per-round box optimum is a_t / w, which
    # random walks with exact per-step length drift_rate inside [lo, hi]^d
    if spec.drift_rate is None:
        raise ValueError("drifting adversary requires drift_rate")
    w = spec.w_diag
    W = w * np.eye(d)
    lo, hi = 0.52, 0.72
    if spec.drift_rate >= (hi - lo):
        raise ValueError("drift_rate must be smaller than the drift band")
    u = np.empty((horizon, d))
    u[0] = rng.uniform(lo + 0.02, hi - 0.02, d)
    for t in range(1, horizon):
        nxt = u[t - 1] + spec.drift_rate * reductions.unit_sphere_sample(rng, d)
        # reflect at the walls; each bounce preserves the step length
        while np.any(nxt < lo) or np.any(nxt > hi):
            nxt = np.where(nxt < lo, 2 * lo - nxt, nxt)
            nxt = np.where(nxt > hi, 2 * hi - nxt, nxt)
        u[t] = nxt
    A = w * u
    return Adversary(spec, horizon, W, A, designed_optima=u)


# ---------------------------------------------------------------------------
# regret metrics
# ---------------------------------------------------------------------------

@dataclass
class RegretReport:
    static_regret: float = math.nan
    adaptive_regret: float = math.nan
    dynamic_regret: float = math.nan
    path_length_PT: float = math.nan
    benchmark_value: float = math.nan
    benchmark_error_bound: float = math.nan
    adaptive_plan_seed: int = 0


def _comparator_map(record: reductions.RunRecord, dom: Domain):
    """Comparator rescaling for shrunk-domain modes: u -> c + (1-delta/r)(u-c)."""
    delta = record.meta.get("delta_smooth", 0.0)
    if not delta:
        return lambda X: X
    gamma = 1.0 - delta / dom.inner_radius
    c = dom.center
    return lambda X: c + gamma * (np.asarray(X) - c)


def batched_benchmark(A_rows: np.ndarray, W: np.ndarray, dom: Domain,
                      n_starts: int = 2, iters: int = 120,
                      seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Multistart batched projected gradient ascent for many quadratics that
    share W.  Returns (argmax points, values); values are lower bounds."""
    A_rows = np.asarray(A_rows, float)
    n, d = A_rows.shape
    rng = np.random.default_rng(seed)
    step = 1.0 / max(np.linalg.norm(W, 2), 1e-6)
    starts = [np.tile(dom.center, (n, 1))]
    for _ in range(n_starts - 1):
        s = dom.euclidean_project_many(rng.uniform(0, 1, (1, d)))[0]
        starts.append(np.tile(s, (n, 1)))
    best_x = starts[0]
    best_v = np.full(n, -np.inf)
    for X in starts:
        for _ in range(iters):
            X = dom.euclidean_project_many(X + step * (A_rows - X @ W))
        v = np.einsum("ti,ti->t", A_rows, X) - 0.5 * np.einsum(
            "ti,ij,tj->t", X, W, X)
        better = v > best_v
        best_x = np.where(better[:, None], X, best_x)
        best_v = np.maximum(v, best_v)
    return best_x, best_v


def regret_static(record: reductions.RunRecord, adversary: Adversary,
                  dom: Domain) -> tuple[float, float, float]:
    """Returns (regret, benchmark value, benchmark error bound)."""
    bench = offline_benchmark([adversary.mean_objective()], dom)
    u = _comparator_map(record, dom)(bench.x)
    total = float(adversary.A.sum(axis=0) @ u
                  - 0.5 * adversary.horizon * (u @ adversary.W @ u))
    return (ALPHA * total - float(record.rewards.sum()),
            bench.value, bench.error_bound)


def _interval_plan(T: int, n_sampled: int, seed: int) -> np.ndarray:
    """(start, stop) half-open interval plan: exact for T <= 512, otherwise
    aligned dyadic intervals plus uniformly sampled ones."""
    if T <= 512:
        s, e = np.meshgrid(np.arange(T), np.arange(1, T + 1), indexing="ij")
        mask = e > s
        return np.stack([s[mask], e[mask]], axis=1)
    ivals = []
    length = T
    # cap the dyadic ladder at 511 intervals (lengths down to T/256)
    while length >= max(1, T // 256):
        starts = np.arange(0, T - length + 1, length)
        ivals.append(np.stack([starts, starts + length], axis=1))
        length //= 2
    rng = np.random.default_rng(seed)
    a = rng.integers(0, T, n_sampled)
    b = rng.integers(0, T, n_sampled)
    lo, hi = np.minimum(a, b), np.maximum(a, b) + 1
    ivals.append(np.stack([lo, hi], axis=1))
    return np.unique(np.concatenate(ivals, axis=0), axis=0)


def regret_adaptive(record: reductions.RunRecord, adversary: Adversary,
                    dom: Domain, n_sampled: int = 500,
                    plan_seed: int = 0) -> float:
    T = adversary.horizon
    plan = _interval_plan(T, n_sampled, plan_seed)
    SA = np.vstack([np.zeros(adversary.dim), np.cumsum(adversary.A, axis=0)])
    SR = np.concatenate([[0.0], np.cumsum(record.rewards)])
    lengths = (plan[:, 1] - plan[:, 0]).astype(float)
    means = (SA[plan[:, 1]] - SA[plan[:, 0]]) / lengths[:, None]
    X, _ = batched_benchmark(means, adversary.W, dom, seed=plan_seed)
    X = _comparator_map(record, dom)(X)
    vals = (np.einsum("ti,ti->t", means, X)
            - 0.5 * np.einsum("ti,ij,tj->t", X, adversary.W, X))
    interval_regret = ALPHA * lengths * vals - (SR[plan[:, 1]] - SR[plan[:, 0]])
    return float(interval_regret.max())


def regret_dynamic(record: reductions.RunRecord, adversary: Adversary,
                   dom: Domain) -> tuple[float, float]:
    U, vals = batched_benchmark(adversary.A, adversary.W, dom)
    Uc = _comparator_map(record, dom)(U)
    vals = (np.einsum("ti,ti->t", adversary.A, Uc)
            - 0.5 * np.einsum("ti,ij,tj->t", Uc, adversary.W, Uc))
    regret = ALPHA * float(vals.sum()) - float(record.rewards.sum())
    p_t = float(np.linalg.norm(np.diff(U, axis=0), axis=1).sum())
    return regret, p_t


def fit_slope(points) -> tuple[float, float]:
    """Least-squares slope of log regret vs log T; nonpositive regrets are
    excluded with a warning."""
    pts = [(T, r) for T, r in points if r > 0]
    dropped = len(list(points)) - len(pts)
    if dropped:
        warnings.warn(f"fit_slope: excluded {dropped} nonpositive regret value(s)")
    if len(pts) < 2:
        raise ValueError("need at least two positive (T, regret) points")
    x = np.log(np.array([p[0] for p in pts], float))
    y = np.log(np.array([p[1] for p in pts], float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


# ---------------------------------------------------------------------------
# experiment engine
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    adversary: AdversarySpec
    horizon: int
    seed: int = 0
    domain_kind: str = "box"
    domain_scale: float | None = None
    domain_weights: tuple | None = None
    domain_budget: float | None = None
    learner: str = "so_oga"
    v: float = 0.5
    expert_projection: str = "exact"
    feedback: str = "first_full"
    block_size: int | None = None
    delta_smooth: float | None = None
    learner_m1: float | None = None  # override the feedback-derived bound
    quad_nodes: int = 128
    metrics: tuple = ("static",)
    instrument: bool = False
    out_dir: str | None = None

    def config_hash(self) -> str:
        fields = asdict(self)
        fields.pop("out_dir")  # the output location is not part of the run
        text = repr(sorted(fields.items()))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def run_id(self) -> str:
        return f"{self.feedback}_{self.learner}_T{self.horizon}_s{self.seed}_{self.config_hash()}"


def _build_domain(cfg: ExperimentConfig) -> Domain:
    return make_domain(cfg.domain_kind, cfg.adversary.dim,
                       scale=cfg.domain_scale,
                       weights=cfg.domain_weights, budget=cfg.domain_budget)


def _estimator_bound(cfg: ExperimentConfig, adversary: Adversary,
                     dom: Domain, delta: float | None) -> float:
    half = adversary.spec.noise_sigma * math.sqrt(3.0)
    if cfg.feedback in ("first_full", "semi_bandit"):
        return adversary.m1 + half * math.sqrt(adversary.dim)
    return adversary.dim / delta * (adversary.value_bound + half)


def run_experiment(cfg: ExperimentConfig):
    """Execute one run; returns (RunRecord, RegretReport).  Persists the
    trace and report as CSV when out_dir is set."""
    if cfg.feedback not in reductions.FEEDBACK_MODES:
        raise ValueError(f"unknown feedback mode {cfg.feedback!r}")
    dom = _build_domain(cfg)
    adversary = build_adversary(cfg.adversary, cfg.horizon)
    ss = np.random.SeedSequence(cfg.seed)
    wrapper_seed, oracle_seed = ss.spawn(2)
    adversary.oracle_seed = oracle_seed
    rng = np.random.default_rng(wrapper_seed)
    T = cfg.horizon

    delta = None
    if cfg.feedback == "zeroth_full":
        delta = cfg.delta_smooth or reductions.default_fotzo_delta(T, dom.inner_radius)
    elif cfg.feedback == "bandit":
        delta = cfg.delta_smooth or reductions.default_stb_delta(T, dom.inner_radius)
    learner_dom = dom.shrink(delta) if delta else dom
    m1 = cfg.learner_m1 or _estimator_bound(cfg, adversary, dom, delta)
    if cfg.learner == "so_oga":
        learner = SoOga(learner_dom, T, m1, v=cfg.v)
    elif cfg.learner == "ader":
        learner = ImprovedAder(learner_dom, T, m1,
                               expert_projection=cfg.expert_projection)
    else:
        raise ValueError(f"unknown learner {cfg.learner!r}")

    if cfg.feedback == "first_full":
        record = reductions.run_first_order_full(
            adversary, dom, learner, rng,
            instrument=cfg.instrument, quad_nodes=cfg.quad_nodes)
    elif cfg.feedback == "semi_bandit":
        L = cfg.block_size or reductions.default_block_size(T)
        record = reductions.run_semi_bandit(adversary, dom, learner, L, rng)
    elif cfg.feedback == "zeroth_full":
        record = reductions.run_zeroth_full(adversary, dom, learner, delta, rng)
    else:
        L = cfg.block_size or reductions.default_block_size(T)
        record = reductions.run_bandit(adversary, dom, learner, L, delta, rng)

    record.meta.update(learner=cfg.learner, seed=cfg.seed, v=cfg.v,
                       config_hash=cfg.config_hash())

    report = RegretReport()
    if "static" in cfg.metrics:
        report.static_regret, report.benchmark_value, \
            report.benchmark_error_bound = regret_static(record, adversary, dom)
    if "adaptive" in cfg.metrics:
        report.adaptive_regret = regret_adaptive(record, adversary, dom,
                                                 plan_seed=cfg.seed)
        report.adaptive_plan_seed = cfg.seed
    if "dynamic" in cfg.metrics:
        report.dynamic_regret, report.path_length_PT = regret_dynamic(
            record, adversary, dom)

    if cfg.out_dir:
        persist_run(cfg, record, report)
    return record, report


def persist_run(cfg: ExperimentConfig, record: reductions.RunRecord,
                report: RegretReport) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rid = cfg.run_id()
    cum = np.cumsum(record.rewards)
    lines = ["t,reward,cum_reward,query_count"]
    for t in range(len(record.rewards)):
        lines.append(f"{t + 1},{record.rewards[t]:.12g},{cum[t]:.12g},"
                     f"{record.query_counts[t]}")
    (out / f"trace_{rid}.csv").write_text("\n".join(lines) + "\n")
    fields = asdict(report)
    header = ",".join(list(fields) + ["mode", "learner", "T", "seed", "config_hash"])
    row = ",".join([f"{v:.12g}" if isinstance(v, float) else str(v)
                    for v in fields.values()]
                   + [record.meta["mode"], cfg.learner, str(cfg.horizon),
                      str(cfg.seed), cfg.config_hash()])
    (out / f"report_{rid}.csv").write_text(header + "\n" + row + "\n")


def _sweep_worker(args):
    cfg, metric = args
    _, report = run_experiment(cfg)
    return cfg.horizon, cfg.seed, getattr(report, metric)


def sweep(base: ExperimentConfig, horizons, seeds, metric: str = "static_regret",
          jobs: int = 1):
    """Run the (horizon x seed) grid, average the metric per horizon, and fit
    the log-log slope.  Returns (slope, r2, {T: mean regret})."""
    from dataclasses import replace

    metric_key = {"static_regret": ("static",), "adaptive_regret": ("adaptive",),
                  "dynamic_regret": ("dynamic",)}[metric]
    cfgs = [replace(base, horizon=T, seed=s, metrics=metric_key)
            for T in horizons for s in seeds]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_worker, [(c, metric) for c in cfgs]))
    else:
        results = [_sweep_worker((c, metric)) for c in cfgs]
    by_T: dict[int, list[float]] = {}
    for T, _s, val in results:
        by_T.setdefault(T, []).append(val)
    means = {T: float(np.mean(v)) for T, v in sorted(by_T.items())}
    slope, r2 = fit_slope(list(means.items()))
    return slope, r2, means
