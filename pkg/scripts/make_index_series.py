#!/usr/bin/env python3
"""Generate a stock-index-style daily closing-price series as a 1-column CSV.

The series is a random walk whose drift switches between a handful of
regimes, which gives it the piecewise-linear-trend look of real index data.
Fit it with, e.g.:

    segfit fit index.csv --algo dp --k 5 --time-index
    segfit fit index.csv --algo greedy --k 5 --estimate-noise --time-index

To use a real series instead, export its closing prices as one numeric
column per row and pass that file to the same commands.
"""

import argparse
import csv
import sys

import numpy as np


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2500, help="number of trading days")
    ap.add_argument("--regimes", type=int, default=5)
    ap.add_argument("--start", type=float, default=10_000.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="index.csv")
    args = ap.parse_args()

    rng = np.random.Generator(np.random.Philox(args.seed))
    seg = args.n // args.regimes
    drifts = rng.uniform(-8.0, 12.0, size=args.regimes)
    drift = np.repeat(drifts, seg)
    drift = np.concatenate([drift, np.full(args.n - len(drift), drifts[-1])])
    shocks = rng.standard_normal(args.n) * 35.0
    prices = args.start + np.cumsum(drift + shocks)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        for p in prices:
            w.writerow([f"{p:.2f}"])
    print(f"wrote {args.n} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
