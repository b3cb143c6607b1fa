#!/usr/bin/env python3
"""Generate frontend test fixtures from real engine runs.

Writes, per seed: the instance document, the roster CSV, a result document
in the HTTP service's shape, and the progress trace. Also produces one
event-driven re-optimization pair for the diff-view tests.

Usage:
    python3 scripts/make_ui_fixtures.py [--out frontend/tests/fixtures]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from rosteropt import (
    ChangeRequest, HybridConfig, ObjectiveWeights, optimize, reoptimize_event,
    toy_instance,
)
from rosteropt.io import export_roster_csv, instance_to_dict
from rosteropt.service import _roster_statistics

SEEDS = (1, 2, 3)
CONFIG = HybridConfig(total_time_limit=25, phase1_time_budget=10)


def result_doc(instance, result):
    return {
        "status": result.status,
        "objective": result.objective.as_dict(),
        "gap": result.gap,
        "lower_bound": result.lower_bound,
        "phase_timings": result.phase_timings,
        "feasible": True,
        "statistics": _roster_statistics(instance, result.roster),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="frontend/tests/fixtures")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    weights = ObjectiveWeights()

    for seed in SEEDS:
        inst = toy_instance(seed, employees=3, weeks=1)
        result = optimize(inst, weights, CONFIG)
        stem = out / f"job{seed}"
        (stem.with_suffix(".instance.json")).write_text(
            json.dumps(instance_to_dict(inst), indent=2) + "\n")
        export_roster_csv(inst, result.roster, stem.with_suffix(".roster.csv"))
        (stem.with_suffix(".result.json")).write_text(
            json.dumps(result_doc(inst, result), indent=2) + "\n")
        (stem.with_suffix(".trace.ndjson")).write_text(
            "".join(ev.to_json() + "\n" for ev in result.trace))

    # event-driven pair for the diff view: vacation on a worked day
    inst = toy_instance(SEEDS[0], employees=3, weeks=1)
    base = optimize(inst, weights, CONFIG)
    occupied = base.roster.x[:, 12:, :].sum(axis=(1, 2))
    e = int(np.argmax(occupied))
    rel = int(np.nonzero(base.roster.x[e, 12:, :].sum(axis=1))[0][0])
    day = (12 + rel) // 3
    blocks = list(range(3 * day, 3 * day + 3))
    req = ChangeRequest(e, "vacation", blocks, [1, 1, 1], effective_from=12)
    ev, new_inst = reoptimize_event(inst, base.roster, [req], weights, CONFIG)
    export_roster_csv(inst, base.roster, out / "diff.base.csv")
    export_roster_csv(new_inst, ev.roster, out / "diff.new.csv")
    (out / "diff.meta.json").write_text(json.dumps({
        "changes": [{"employee": e, "kind": "vacation", "blocks": blocks,
                     "values": [1, 1, 1], "effective_from": 12}],
        "deviation": ev.objective.deviation,
    }, indent=2) + "\n")
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
