#!/usr/bin/env python3
"""Gap-threshold timing table: hybrid pipeline vs pure branch and bound.

Prints, for each gap threshold, the mean time to reach it and how many
trials reached it, per mode.  Thin wrapper over `rosteropt bench` so runs
are reproducible from a single command line.

Example:
    python3 scripts/benchmark_gap_table.py --employees 12 --weeks 2 \
        --trials 3 --time-limit 120
"""

import argparse
import sys

from rosteropt.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--employees", type=int, default=6)
    p.add_argument("--weeks", type=int, default=2)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--toy", action="store_true",
                   help="sparse-cover instances instead of benchmark cover")
    return p.parse_args()


def main():
    args = parse_args()
    argv = ["bench", "--trials", str(args.trials), "--modes", "hybrid,milp",
            "--employees", str(args.employees), "--weeks", str(args.weeks),
            "--seed", str(args.seed), "--time-limit", str(args.time_limit)]
    if args.toy:
        argv.append("--toy")
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
