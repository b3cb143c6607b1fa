"""Command-line entry point.

Subcommands: generate, solve, reopt, rolling, patterns, bench, export,
check, serve.  Exit codes: 0 success, 1 usage/parse errors, 2 infeasible
instance or failed check.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .bnb import NoSolutionError
from .extensions import (
    ChangeRequest, RollingHorizonError, optimize_with_patterns,
    plan_rolling_horizon, reoptimize_event,
)
from .feasibility import check_feasibility, validate_instance
from .generator import GeneratorConfig, generate_instance, toy_instance
from .hybrid import (
    EmptyPoolError, HybridConfig, InfeasibleInstanceError, compute_gap,
    optimize,
)
from .io import (
    ParseError, export_roster_csv, import_roster_csv, load_instance,
    load_pattern, save_instance,
)
from .model import ObjectiveWeights, Roster
from .objective import evaluate_objective

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

GAP_THRESHOLDS = (0.50, 0.20, 0.10, 0.05, 0.03, 0.01)


def _weights_from_args(args) -> ObjectiveWeights:
    return ObjectiveWeights(
        lam=tuple(args.lam), theta=tuple(args.theta),
        gamma=getattr(args, "gamma", 1.0), mu=getattr(args, "mu", 1.0))


def _hybrid_config(args) -> HybridConfig:
    return HybridConfig(
        gap_target=args.gap, phase1_time_budget=args.phase1_budget,
        total_time_limit=args.time_limit, use_relax_and_fix=not args.no_relax_fix,
        mode=args.mode, seed=args.seed)


def _add_solve_options(p):
    p.add_argument("--gap", type=float, default=0.05,
                   help="relative optimality gap target (default 0.05)")
    p.add_argument("--time-limit", type=float, default=300.0, dest="time_limit")
    p.add_argument("--phase1-budget", type=float, default=60.0,
                   dest="phase1_budget")
    p.add_argument("--mode", choices=("hybrid", "milp_alone"), default="hybrid")
    p.add_argument("--no-relax-fix", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float, nargs=3, default=[1.0, 1.0, 1.0],
                   metavar=("L1", "L2", "L3"))
    p.add_argument("--theta", type=float, nargs=3, default=[0.7, 0.7, 1.0],
                   metavar=("T1", "T2", "T3"))
    p.add_argument("--progress", action="store_true",
                   help="print progress events as they happen")


def _progress_printer(enabled):
    if not enabled:
        return None

    def sink(ev):
        print(ev.to_json(), file=sys.stderr)
    return sink


def _write_result(result, instance, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    export_roster_csv(instance, result.roster, out_dir / "roster.csv")
    (out_dir / "trace.ndjson").write_text(
        "".join(ev.to_json() + "\n" for ev in result.trace))
    summary = {
        "status": result.status,
        "objective": result.objective.as_dict(),
        "gap": result.gap,
        "lower_bound": result.lower_bound,
        "phase_timings": result.phase_timings,
    }
    (out_dir / "result.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_generate(args) -> int:
    if args.toy:
        instance = toy_instance(args.seed, employees=args.employees,
                                weeks=args.weeks)
    else:
        config = GeneratorConfig(employees=args.employees, weeks=args.weeks,
                                 preference_density=args.preference_density)
        instance = generate_instance(config, args.seed)
    save_instance(instance, args.out)
    print(f"wrote {args.out}: {instance.n_employees} employees, "
          f"{instance.weeks} weeks, {instance.n_shift_types} shift types")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    weights = _weights_from_args(args)
    config = _hybrid_config(args)
    try:
        result = optimize(instance, weights, config,
                          progress_sink=_progress_printer(args.progress))
    except (InfeasibleInstanceError, EmptyPoolError, NoSolutionError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    summary = _write_result(result, instance, Path(args.out))
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_reopt(args) -> int:
    instance = load_instance(args.instance)
    roster = import_roster_csv(instance, args.roster)
    changes = []
    for i, raw in enumerate(json.loads(Path(args.changes).read_text())):
        try:
            changes.append(ChangeRequest(
                employee=raw["employee"], kind=raw["kind"],
                blocks=np.array(raw["blocks"]), values=np.array(raw["values"]),
                effective_from=raw["effective_from"]))
        except (KeyError, ValueError) as exc:
            print(f"bad change request #{i}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    weights = _weights_from_args(args)
    config = _hybrid_config(args)
    try:
        result, new_instance = reoptimize_event(
            instance, roster, changes, weights, config,
            progress_sink=_progress_printer(args.progress))
    except (InfeasibleInstanceError, EmptyPoolError, NoSolutionError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    summary = _write_result(result, new_instance, Path(args.out))
    summary["deviation"] = result.objective.deviation
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_rolling(args) -> int:
    weights = _weights_from_args(args)
    config = _hybrid_config(args)
    gen = GeneratorConfig(employees=args.employees, weeks=args.weeks)
    factory = None
    if args.toy:
        def factory(cfg, seed):
            return toy_instance(seed, employees=cfg.employees, weeks=cfg.weeks)
    try:
        plans = plan_rolling_horizon(gen, args.periods, weights, config,
                                     adaptive=not args.no_adaptive,
                                     seed=args.seed, instance_factory=factory)
    except RollingHorizonError as exc:
        print(f"{exc} ({len(exc.partial)} periods completed)", file=sys.stderr)
        return EXIT_INFEASIBLE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for plan in plans:
        export_roster_csv(plan.instance, plan.roster,
                          out / f"period_{plan.period}.csv")
    report = [{
        "period": p.period, "status": p.status, "gap": p.gap,
        "workloads": p.workloads.tolist(),
        "weekend_workloads": p.weekend_workloads.tolist(),
    } for p in plans]
    (out / "plan.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"solved {len(plans)} periods -> {out}")
    return EXIT_OK


def cmd_patterns(args) -> int:
    instance = load_instance(args.instance)
    pattern = load_pattern(args.pattern)
    weights = _weights_from_args(args)
    config = _hybrid_config(args)
    try:
        pres = optimize_with_patterns(instance, pattern, weights, config,
                                      progress_sink=_progress_printer(args.progress))
    except (InfeasibleInstanceError, EmptyPoolError, NoSolutionError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    summary = _write_result(pres.result, instance, Path(args.out))
    summary["assignment"] = pres.assignment.tolist()
    summary["stage1_conflicts"] = pres.stage1_conflicts
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    """Mean time to reach each gap threshold, per mode, across seeded trials.

    The reference bound for gap measurement is the strongest lower bound any
    run produced on that instance, so thresholds are comparable between
    modes; unreached cells print '-'.
    """
    weights = ObjectiveWeights()
    modes = args.modes.split(",")
    rows = {g: {mode: [] for mode in modes} for g in GAP_THRESHOLDS}
    total_start = time.monotonic()
    for trial in range(args.trials):
        if args.toy:
            instance = toy_instance(args.seed + trial, employees=args.employees,
                                    weeks=args.weeks)
        else:
            instance = generate_instance(
                GeneratorConfig(employees=args.employees, weeks=args.weeks),
                args.seed + trial)
        traces = {}
        best_bound = float("-inf")
        for mode in modes:
            config = HybridConfig(
                gap_target=0.01, phase1_time_budget=args.time_limit / 3,
                total_time_limit=args.time_limit,
                mode=("milp_alone" if mode == "milp" else "hybrid"),
                use_relax_and_fix=(mode != "milp"), seed=args.seed + trial)
            try:
                result = optimize(instance, weights, config)
            except (InfeasibleInstanceError, EmptyPoolError,
                    NoSolutionError) as exc:
                print(f"# trial {trial} mode {mode}: no solution ({exc})",
                      file=sys.stderr)
                traces[mode] = []
                continue
            traces[mode] = result.trace
            best_bound = max(best_bound, result.lower_bound)
        for mode in modes:
            for g in GAP_THRESHOLDS:
                reached = None
                for ev in traces.get(mode, []):
                    if np.isfinite(ev.incumbent) and best_bound > -np.inf:
                        gap = compute_gap(ev.incumbent,
                                          min(best_bound, ev.incumbent))
                        if gap <= g:
                            reached = ev.elapsed_s
                            break
                rows[g][mode].append(reached)

    header = ["gap"] + [f"{m}_mean_s" for m in modes] + [f"{m}_reached" for m in modes]
    print("\t".join(header))
    for g in GAP_THRESHOLDS:
        cells = [f"{int(g * 100)}%"]
        for m in modes:
            vals = [v for v in rows[g][m] if v is not None]
            cells.append(f"{np.mean(vals):.2f}" if vals else "-")
        for m in modes:
            vals = [v for v in rows[g][m] if v is not None]
            cells.append(f"{len(vals)}/{len(rows[g][m])}")
        print("\t".join(cells))
    print(f"# total {time.monotonic() - total_start:.1f}s", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    instance = load_instance(args.instance)
    roster = import_roster_csv(instance, args.roster)
    export_roster_csv(instance, roster, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    instance = load_instance(args.instance)
    vreport = validate_instance(instance)
    if not vreport.ok:
        for problem in vreport.problems:
            print(f"instance: {problem}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.roster is None:
        print("instance ok")
        return EXIT_OK
    roster = import_roster_csv(instance, args.roster)
    report = check_feasibility(instance, roster)
    if not report.feasible:
        for v in report.violations:
            print(f"violation: {v.description}", file=sys.stderr)
        return EXIT_INFEASIBLE
    breakdown = evaluate_objective(instance, roster, ObjectiveWeights())
    print("roster ok " + json.dumps(breakdown.as_dict()))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(Path(args.data_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rosteropt", description="employee rostering optimization engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a randomized instance file")
    p.add_argument("--employees", type=int, default=12)
    p.add_argument("--weeks", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preference-density", type=float, default=0.2)
    p.add_argument("--toy", action="store_true",
                   help="small sparse-cover instance instead of benchmark cover")
    p.add_argument("--out", default="instance.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="optimize an instance")
    p.add_argument("instance")
    p.add_argument("--out", default="run")
    _add_solve_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reopt", help="re-optimize after change requests")
    p.add_argument("instance")
    p.add_argument("roster", help="published roster CSV")
    p.add_argument("changes", help="JSON list of change requests")
    p.add_argument("--out", default="reopt")
    _add_solve_options(p)
    p.set_defaults(func=cmd_reopt)

    p = sub.add_parser("rolling", help="sequential multi-period planning")
    p.add_argument("--periods", type=int, default=4)
    p.add_argument("--employees", type=int, default=6)
    p.add_argument("--weeks", type=int, default=2, help="weeks per period")
    p.add_argument("--no-adaptive", action="store_true")
    p.add_argument("--toy", action="store_true")
    p.add_argument("--out", default="rolling")
    _add_solve_options(p)
    p.set_defaults(func=cmd_rolling)

    p = sub.add_parser("patterns", help="two-stage pattern-aware optimization")
    p.add_argument("instance")
    p.add_argument("pattern", help="8x7 grid file of day labels")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--out", default="patterns")
    _add_solve_options(p)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("bench", help="gap-vs-time table across seeded trials")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--modes", default="hybrid,milp")
    p.add_argument("--employees", type=int, default=6)
    p.add_argument("--weeks", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--toy", action="store_true")
    p.add_argument("--time-limit", type=float, default=60.0, dest="time_limit")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="normalize a roster CSV (re-emit with stats)")
    p.add_argument("instance")
    p.add_argument("roster")
    p.add_argument("--out", default="roster.csv")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("check", help="validate an instance and optionally a roster")
    p.add_argument("instance")
    p.add_argument("roster", nargs="?", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="jobs")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
