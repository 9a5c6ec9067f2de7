#!/usr/bin/env python3
"""Run the full numerical certification suite and print a slack table.

Equivalent to `drsubmax verify`; kept as a script so the checks can be run
with custom budgets during development.

Usage:
    python3 scripts/run_certification.py [--quad-nodes 128] [--seed 0]
"""

import argparse
import sys
import time

from drsubmax.verification import run_all_checks


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quad-nodes", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    start = time.monotonic()
    results = run_all_checks(quad_nodes=args.quad_nodes, seed=args.seed)
    elapsed = time.monotonic() - start
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  statistic={r.statistic:+.6e}"
              f"  threshold={r.threshold:+.3e}"
              + (f"  ({r.detail})" if r.detail else ""))
    print(f"total {elapsed:.1f}s")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
