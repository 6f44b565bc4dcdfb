#!/usr/bin/env python3
"""Full accuracy-versus-runtime sweep for all estimators.

Runs the two standard synthetic scenarios (piecewise constant with k=10 and
piecewise linear with d=10, k=5), sample sizes log-spaced from 100 to 10^4,
the exact DP plus the merging estimator at the k, 2k, and 4k piece settings,
and writes one plot-data file per algorithm into
<out-dir>/<scenario>/. Use --quick for a smoke-scale pass.
"""

import argparse
import sys
from pathlib import Path

from segfit import ScenarioSpec, run_sweep, write_plot_data


def n_grid(lo: int, hi: int, points: int) -> list[int]:
    import numpy as np

    return sorted(set(int(round(v)) for v in np.geomspace(lo, hi, points)))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="bench_results")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=10_000)
    ap.add_argument("--points", type=int, default=9, help="number of n values on the log grid")
    ap.add_argument("--dp-cap", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true", help="tiny grid and 3 trials")
    args = ap.parse_args()

    trials = 3 if args.quick else args.trials
    n_values = n_grid(100, 1000 if args.quick else args.n_max, 4 if args.quick else args.points)
    algos = ["dp", "greedy-k", "greedy-2k", "greedy-4k", "bucket", "bucket-post"]

    scenarios = {
        "constant_k10": ScenarioSpec(kind="piecewise_constant", k=10, n=max(n_values),
                                     noise_sigma=1.0, seed=args.seed),
        "linear_d10_k5": ScenarioSpec(kind="piecewise_linear", k=5, n=max(n_values), d=10,
                                      noise_sigma=1.0, seed=args.seed),
    }
    for name, template in scenarios.items():
        print(f"== {name}: n in {n_values}, {trials} trials ==")
        records = run_sweep(template, n_values, algos, trials=trials, dp_n_cap=args.dp_cap)
        paths = write_plot_data(records, Path(args.out_dir) / name)
        for p in paths:
            print(f"  wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
