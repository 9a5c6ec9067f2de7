#!/usr/bin/env python3
"""Dynamic-regret benchmark on a drifting adversary.

The adversary's per-round optimum random-walks with step length 2/sqrt(T)
inside a knapsack domain, giving a designed path length proportional to
sqrt(T).  For each horizon the script reports the mean dynamic 1/e-regret,
the mean path length P_T, and the normalized ratio regret/sqrt(T(1+P_T)),
then compares the expert-ensemble learner against plain gradient ascent at
the largest horizon.

Usage:
    python3 scripts/run_dynamic_benchmark.py [--horizons ...] [--seeds 10]
"""

import argparse
import math
import sys

import numpy as np

from drsubmax.harness import AdversarySpec, ExperimentConfig, run_experiment


def make_config(T: int, seed: int, learner: str) -> ExperimentConfig:
    spec = AdversarySpec("drifting", 3, noise_sigma=0.2, w_diag=4.0,
                         drift_rate=2.0 / math.sqrt(T))
    return ExperimentConfig(
        adversary=spec, horizon=T, seed=seed, domain_kind="knapsack",
        domain_weights=(1.0, 1.0, 1.0), domain_budget=1.2,
        learner=learner, metrics=("dynamic",))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizons", nargs="+", type=int,
                    default=[2 ** k for k in range(10, 15)])
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    for T in args.horizons:
        regrets, pts = [], []
        for s in range(args.seeds):
            _, rep = run_experiment(make_config(T, s, "ader"))
            regrets.append(rep.dynamic_regret)
            pts.append(rep.path_length_PT)
        r, p = float(np.mean(regrets)), float(np.mean(pts))
        print(f"T={T:>6}: regret {r:>10.1f}  P_T {p:>7.2f}  "
              f"ratio {r / math.sqrt(T * (1 + p)):>7.3f}")

    T = args.horizons[-1]
    ader = np.mean([run_experiment(make_config(T, s, "ader"))[1].dynamic_regret
                    for s in range(args.seeds)])
    oga = np.mean([run_experiment(make_config(T, s, "so_oga"))[1].dynamic_regret
                   for s in range(args.seeds)])
    print(f"at T={T}: ader {ader:.1f} vs so_oga {oga:.1f} "
          f"({'ader wins' if ader < oga else 'so_oga wins'})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
