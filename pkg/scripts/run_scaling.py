#!/usr/bin/env python3
"""Measure pipeline runtime over growing ER sizes and fit the log-log slope.

Writes the per-size phase timings as CSV (stdout or --out) with a trailing
slope comment line when two or more sizes are given.
"""
import argparse
import sys

from netalign.cli import _parse_sizes
from netalign.harness import bench_scaling


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--sizes",
        default="100:1000,500:10000,1000:100000,2000:500000",
        help="comma list of n:m pairs",
    )
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="also write the CSV to this path")
    args = ap.parse_args()

    result = bench_scaling(_parse_sizes(args.sizes), args.seed)
    if args.out:
        result.write_csv(args.out)
    sys.stdout.write(result.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
