"""Command-line front end.

Subcommands:
  verify  — run the numerical certification sweeps and print a slack table
  run     — execute the experiments described by a config file
  sweep   — run a horizon x seed grid, fit log-log regret slopes, and
            compare them against the target exponents per feedback mode
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import verification
from .config import ConfigError, experiment_config, load_config, \
    write_effective_config
from .harness import fit_slope, run_experiment

# target regret exponents per feedback mode (static unless noted)
SWEEP_TARGETS = {
    "first_full": 0.5,
    "semi_bandit": 2.0 / 3.0,
    "zeroth_full": 3.0 / 4.0,
    "bandit": 4.0 / 5.0,
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drsubmax")
    sub = p.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run numerical certification sweeps")
    verify.add_argument("--quad-nodes", type=int, default=128)
    verify.add_argument("--seed", type=int, default=0)
    # test-only negative control: flips the estimator's sign so the
    # unbiasedness audit must fail
    verify.add_argument("--sabotage-bqnd", action="store_true",
                        help=argparse.SUPPRESS)

    for name in ("run", "sweep"):
        c = sub.add_parser(name)
        c.add_argument("--config", required=True)
        c.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        c.add_argument("--jobs", type=int, default=1)
        c.add_argument("--quad-nodes", type=int, default=None)
        c.add_argument("--plots", action="store_true",
                       help="emit log-log regret plots (requires matplotlib)")
    return p


def cmd_verify(args) -> int:
    results = verification.run_all_checks(quad_nodes=args.quad_nodes,
                                          seed=args.seed,
                                          sabotage_bqnd=args.sabotage_bqnd)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = (f"{r.name:<{width}}  {status}  statistic={r.statistic:+.6e}"
                f"  threshold={r.threshold:+.3e}")
        if r.detail:
            line += f"  ({r.detail})"
        print(line)
    failing = [r for r in results if not r.passed]
    if failing:
        print(f"verification failed: {failing[0].name}", file=sys.stderr)
        return 1
    return 0


def _load(args) -> dict:
    cfg = load_config(args.config)
    if args.quad_nodes:
        cfg["run"]["quad_nodes"] = args.quad_nodes
    if args.out:
        cfg["run"]["out_dir"] = args.out
    if cfg["run"]["out_dir"] is None:
        raise ConfigError("an output directory is required "
                          "(config [run] out_dir or --out)")
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(cfg["run"]["out_dir"])
    write_effective_config(cfg, out / "effective_config.ini")
    for T in cfg["run"]["horizons"]:
        for seed in cfg["run"]["seeds"]:
            ecfg = experiment_config(cfg, T, seed, out_dir=str(out))
            _, report = run_experiment(ecfg)
            print(f"T={T} seed={seed} static_regret={report.static_regret:.4f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    horizons = cfg["run"]["horizons"]
    seeds = cfg["run"]["seeds"]
    if len(horizons) < 4:
        print("sweep requires at least 4 horizons", file=sys.stderr)
        return 2
    if len(seeds) < 10:
        print("sweep requires at least 10 seeds", file=sys.stderr)
        return 2
    out = Path(cfg["run"]["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    write_effective_config(cfg, out / "effective_config.ini")

    metric = {"static": "static_regret", "adaptive": "adaptive_regret",
              "dynamic": "dynamic_regret"}[cfg["run"]["metrics"][0]]
    mode = cfg["run"]["feedback"]
    from .harness import sweep as run_sweep
    base = experiment_config(cfg, horizons[0], seeds[0], out_dir=None)
    try:
        slope, r2, means = run_sweep(base, horizons, seeds, metric=metric,
                                     jobs=args.jobs)
    except ValueError:
        # a log-log fit needs positive regrets; report the means and bail
        print("slope undefined: fewer than two horizons have positive "
              "mean regret", file=sys.stderr)
        (out / "slopes.csv").write_text("mode,learner,slope,r2,horizons,seeds\n"
                                        f"{mode},{cfg['learner']['kind']},nan,"
                                        f"nan,{' '.join(map(str, horizons))},"
                                        f"{' '.join(map(str, seeds))}\n")
        return 1
    target = SWEEP_TARGETS.get(mode, float("nan"))
    header = "mode,learner,slope,r2,horizons,seeds\n"
    row = (f"{mode},{cfg['learner']['kind']},{slope:.6f},{r2:.6f},"
           f"{' '.join(map(str, horizons))},{' '.join(map(str, seeds))}\n")
    (out / "slopes.csv").write_text(header + row)
    print(f"mode={mode} measured slope={slope:.4f} (r2={r2:.4f}) "
          f"target={target:.4f}")
    for T, m in means.items():
        print(f"  T={T}: mean regret {m:.4f}")
    if args.plots:
        _emit_plot(out, means, slope)
    return 0


def _emit_plot(out: Path, means: dict, slope: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    Ts = np.array(sorted(means))
    vals = np.array([means[T] for T in Ts])
    fig, ax = plt.subplots()
    ax.loglog(Ts, vals, "o-", label=f"measured (slope {slope:.3f})")
    ax.set_xlabel("T")
    ax.set_ylabel("regret")
    ax.legend()
    fig.savefig(out / "regret_loglog.png", dpi=120)
    plt.close(fig)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
