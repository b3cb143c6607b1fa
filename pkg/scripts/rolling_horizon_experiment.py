#!/usr/bin/env python3
"""Adaptive vs non-adaptive rolling-horizon planning.

For each seed, plans several consecutive periods twice -- once with the
cumulative target-correction scheme, once without -- and reports the
cross-employee standard deviation of total weekend workload over the whole
horizon.  Lower is fairer.

Example:
    python3 scripts/rolling_horizon_experiment.py --seeds 5 --periods 4
"""

import argparse

import numpy as np

from rosteropt import (
    GeneratorConfig, HybridConfig, ObjectiveWeights, plan_rolling_horizon,
    toy_instance,
)


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--employees", type=int, default=6)
    p.add_argument("--weeks", type=int, default=2, help="weeks per period")
    p.add_argument("--periods", type=int, default=4)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed0", type=int, default=100)
    p.add_argument("--time-limit", type=float, default=15.0)
    p.add_argument("--toy", action="store_true", default=True,
                   help="sparse-cover instances (default; benchmark cover "
                        "needs a 12-employee workforce)")
    p.add_argument("--benchmark-cover", dest="toy", action="store_false")
    return p.parse_args()


def weekend_spread(plans):
    annual = sum(p.weekend_workloads.sum(axis=1) for p in plans)
    return float(np.std(annual))


def main():
    args = parse_args()
    cfg = GeneratorConfig(employees=args.employees, weeks=args.weeks)
    hybrid = HybridConfig(total_time_limit=args.time_limit,
                          phase1_time_budget=args.time_limit / 2)
    weights = ObjectiveWeights()
    factory = None
    if args.toy:
        def factory(c, seed):
            return toy_instance(seed, employees=c.employees, weeks=c.weeks)

    print("seed\tadaptive_std\tplain_std")
    adaptive_all, plain_all = [], []
    for s in range(args.seed0, args.seed0 + args.seeds):
        results = {}
        for adaptive in (True, False):
            plans = plan_rolling_horizon(
                cfg, args.periods, weights, hybrid, adaptive=adaptive,
                seed=s, instance_factory=factory)
            results[adaptive] = weekend_spread(plans)
        adaptive_all.append(results[True])
        plain_all.append(results[False])
        print(f"{s}\t{results[True]:.3f}\t{results[False]:.3f}")
    print(f"mean\t{np.mean(adaptive_all):.3f}\t{np.mean(plain_all):.3f}")


if __name__ == "__main__":
    main()
