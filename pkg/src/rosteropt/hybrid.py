"""Two-phase orchestration: branch-and-bound seeding (with optional
relax-and-fix) followed by scatter search, with a streamed optimality gap.

Also exposes a pure branch-and-bound mode for A/B comparisons.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bnb import (
    BnbConfig, InfeasibleModelError, NoSolutionError, relax_and_fix, solve_bnb,
)
from .feasibility import check_feasibility
from .milp import (
    MilpModel, VariableMap, build_milp, encode_roster, extract_roster,
)
from .model import ObjectiveBreakdown, ObjectiveWeights, Roster, RosterInstance
from .objective import EvaluationContext, evaluate_objective
from .scatter import (
    GenerationRecord, LocalSearchConfig, ScatterLimits, diversify,
    run_scatter_search,
)

GAP_EPS = 1e-9

MODE_HYBRID = "hybrid"
MODE_MILP_ALONE = "milp_alone"


def compute_gap(ub: float, lb: float) -> float:
    """Relative optimality gap (ub - lb) / max(ub, eps), clamped at 0."""
    if lb > ub + GAP_EPS:
        raise ValueError(f"lower bound {lb} exceeds incumbent {ub}")
    if not np.isfinite(ub):
        return float("inf")
    return max(ub - lb, 0.0) / max(abs(ub), GAP_EPS)


@dataclass
class HybridConfig:
    gap_target: float = 0.05
    phase1_time_budget: float = 60.0
    total_time_limit: float = 300.0
    use_relax_and_fix: bool = True
    mode: str = MODE_HYBRID
    seed: int = 0
    pool_size: int = 6
    refset_capacity: int = 5
    backend: Optional[str] = None
    node_limit: int = 100000
    max_generations: int = 50
    local_search: LocalSearchConfig = field(default_factory=LocalSearchConfig)

    def __post_init__(self):
        if not (0.0 <= self.gap_target <= 1.0):
            raise ValueError("gap_target must lie in [0, 1]")
        if self.phase1_time_budget <= 0 or self.total_time_limit <= 0:
            raise ValueError("time budgets must be positive")
        if self.mode not in (MODE_HYBRID, MODE_MILP_ALONE):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class ProgressEvent:
    elapsed_s: float
    phase: str  # relax_fix | bnb | scatter
    incumbent: float
    bound: float
    gap: float
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "elapsed_s": round(self.elapsed_s, 4), "phase": self.phase,
            "incumbent": self.incumbent if np.isfinite(self.incumbent) else None,
            "bound": self.bound if np.isfinite(self.bound) else None,
            "gap": self.gap if np.isfinite(self.gap) else None,
            "detail": self.detail,
        })


ProgressSink = Callable[[ProgressEvent], None]


@dataclass
class OptimizationResult:
    roster: Roster
    objective: ObjectiveBreakdown
    gap: float
    lower_bound: float
    status: str  # optimal | gap_reached | time_limit | stalled
    phase_timings: dict[str, float]
    trace: list[ProgressEvent]
    scatter_trace: list[GenerationRecord] = field(default_factory=list)


class InfeasibleInstanceError(Exception):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class EmptyPoolError(Exception):
    """Phase 1 ran out of budget without any feasible solution; consider
    relaxing parameters or raising the phase-1 budget."""


def optimize_model(
    model: MilpModel,
    var_map: VariableMap,
    instance: RosterInstance,
    weights: ObjectiveWeights,
    config: HybridConfig,
    progress_sink: Optional[ProgressSink] = None,
    context: Optional[EvaluationContext] = None,
    should_stop: Optional[Callable[[], bool]] = None,
) -> OptimizationResult:
    """Run the pipeline on an already-built model (any objective mode)."""
    start = time.monotonic()
    trace: list[ProgressEvent] = []
    timings: dict[str, float] = {}
    monotone = {"incumbent": float("inf"), "bound": float("-inf")}

    def emit(phase: str, incumbent: float, bound: float, detail: str = ""):
        incumbent = min(incumbent, monotone["incumbent"])
        bound = max(bound, monotone["bound"])
        monotone["incumbent"] = incumbent
        monotone["bound"] = bound
        gap = compute_gap(incumbent, min(bound, incumbent)) \
            if np.isfinite(incumbent) else float("inf")
        ev = ProgressEvent(time.monotonic() - start, phase, incumbent, bound,
                           gap, detail)
        trace.append(ev)
        if progress_sink is not None:
            progress_sink(ev)

    # ---- phase 1: LP bound, optional relax-and-fix, branch-and-bound pool
    work_model = model
    global_bound = float("-inf")
    if config.mode == MODE_HYBRID and config.use_relax_and_fix:
        t0 = time.monotonic()
        try:
            reduced, fix_report = relax_and_fix(model, backend=config.backend)
        except InfeasibleModelError:
            raise InfeasibleInstanceError("LP relaxation infeasible")
        global_bound = fix_report.lp_objective
        emit("relax_fix", float("inf"), global_bound,
             f"fixed {fix_report.fixed} of {fix_report.fixed + fix_report.free} "
             "integer variables")
        work_model = reduced
        timings["relax_fix"] = time.monotonic() - t0

    t0 = time.monotonic()
    pool_target = config.pool_size if config.mode == MODE_HYBRID else 2
    bnb_config = BnbConfig(
        pool_size=max(pool_target, 2),
        time_limit=(config.phase1_time_budget if config.mode == MODE_HYBRID
                    else config.total_time_limit),
        gap_target=config.gap_target if config.mode == MODE_MILP_ALONE else 0.0,
        node_limit=config.node_limit,
        backend=config.backend,
    )

    stop_when_pool_full = config.mode == MODE_HYBRID

    # tree bounds of the reduced model only hold on its restricted feasible
    # set; while it is active, the LP bound is the only globally valid one
    bound_is_global = {"v": work_model is model}

    def bnb_progress(info):
        tree_bound = info["best_bound"] if bound_is_global["v"] else float("-inf")
        emit("bnb", info["incumbent"], max(tree_bound, global_bound),
             f"nodes={info['node_count']}")

    try:
        result = _run_bnb(work_model, bnb_config, bnb_progress,
                          stop_when_pool_full, should_stop)
        if result.status == "infeasible" and work_model is not model:
            raise NoSolutionError("reduced model infeasible")
    except NoSolutionError:
        if work_model is model:
            raise EmptyPoolError(
                "phase 1 found no feasible solution within its budget; "
                "relax labor parameters or raise phase1_time_budget")
        # variable fixing is heuristic and can cut off every integer point;
        # rerun on the full model
        emit("relax_fix", float("inf"), global_bound,
             "reduced model yielded no roster; retrying the full model")
        work_model = model
        bound_is_global["v"] = True
        try:
            result = _run_bnb(work_model, bnb_config, bnb_progress,
                              stop_when_pool_full, should_stop)
        except NoSolutionError as exc:
            raise EmptyPoolError(str(exc))
    timings["bnb"] = time.monotonic() - t0
    if result.status == "infeasible":
        raise InfeasibleInstanceError(
            "branch and bound proved infeasibility at the root",
            certificate="root LP relaxation infeasible")
    if not result.pool:
        raise EmptyPoolError(
            "phase 1 found no feasible solution within its budget; relax "
            "labor parameters or increase phase1_time_budget")

    # bound from the reduced model is only valid for the reduced feasible
    # set; the global bound is the original LP relaxation (or the B&B bound
    # when no fixing happened)
    if work_model is model:
        global_bound = max(global_bound, result.best_bound)
    lower_bound = global_bound if np.isfinite(global_bound) else result.best_bound

    rosters = []
    for entry in result.pool:
        roster = extract_roster(var_map, entry.vector)
        report = check_feasibility(instance, roster)
        if report.feasible:
            obj = evaluate_objective(instance, roster, weights, context).total
            rosters.append((roster, obj))
    if not rosters:
        raise EmptyPoolError("no pool roster passed the feasibility checker")
    rosters.sort(key=lambda t: t[1])
    incumbent_roster, incumbent_obj = rosters[0]
    emit("bnb", incumbent_obj, lower_bound, "phase 1 complete")

    status = "gap_reached"
    gap = compute_gap(incumbent_obj, min(lower_bound, incumbent_obj))
    scatter_trace: list[GenerationRecord] = []

    if config.mode == MODE_MILP_ALONE:
        if result.status == "optimal":
            status = "optimal"
        elif gap <= config.gap_target:
            status = "gap_reached"
        else:
            status = "time_limit"
    else:
        if result.status == "optimal" and work_model is model:
            status = "optimal"
        elif gap > config.gap_target:
            # ---- phase 2: scatter search
            t0 = time.monotonic()
            refset = diversify(rosters, capacity=config.refset_capacity)
            remaining = config.total_time_limit - (time.monotonic() - start)
            limits = ScatterLimits(gap_target=config.gap_target,
                                   time_limit=max(remaining, 1.0),
                                   max_generations=config.max_generations)
            rng = np.random.default_rng(config.seed)

            def scatter_progress(rec: GenerationRecord):
                emit("scatter", rec.best_objective, lower_bound,
                     f"generation={rec.generation}")

            best, scatter_trace = run_scatter_search(
                instance, weights, refset, lower_bound, limits, rng,
                ls_config=config.local_search, context=context,
                progress=scatter_progress, should_stop=should_stop)
            best_obj = evaluate_objective(instance, best, weights, context).total
            if best_obj < incumbent_obj:
                incumbent_roster, incumbent_obj = best, best_obj
            timings["scatter"] = time.monotonic() - t0
            gap = compute_gap(incumbent_obj, min(lower_bound, incumbent_obj))
            if gap <= config.gap_target:
                status = "gap_reached"
            elif time.monotonic() - start >= config.total_time_limit - 1e-3:
                status = "time_limit"
            else:
                # scatter ran out of new material before the clock did; the
                # remaining gap may be LP integrality gap, or the heuristic
                # phases may simply be stuck -- settle it with exact search
                # on the full model for the remaining budget
                status = "stalled"
                remaining = config.total_time_limit - (time.monotonic() - start)
                if remaining > 1.0 and (should_stop is None or not should_stop()):
                    t0 = time.monotonic()
                    bound_is_global["v"] = True
                    seed_vec = encode_roster(instance, var_map, incumbent_roster)
                    seed = ((seed_vec, incumbent_obj)
                            if model.check_point(seed_vec) else None)
                    final_cfg = BnbConfig(
                        pool_size=2, time_limit=remaining,
                        gap_target=config.gap_target,
                        node_limit=config.node_limit, backend=config.backend)
                    try:
                        tail = _run_bnb(model, final_cfg, bnb_progress,
                                        False, should_stop, incumbent=seed)
                    except NoSolutionError:
                        tail = None
                    timings["final_bnb"] = time.monotonic() - t0
                    if tail is not None and tail.pool:
                        best_entry = tail.incumbent
                        if best_entry.objective < incumbent_obj - 1e-12:
                            roster = extract_roster(var_map, best_entry.vector)
                            if check_feasibility(instance, roster).feasible:
                                incumbent_roster = roster
                                incumbent_obj = evaluate_objective(
                                    instance, roster, weights, context).total
                        lower_bound = max(lower_bound, tail.best_bound)
                        gap = compute_gap(incumbent_obj,
                                          min(lower_bound, incumbent_obj))
                        if tail.status == "optimal":
                            status = "optimal"
                        elif gap <= config.gap_target:
                            status = "gap_reached"
                        elif time.monotonic() - start \
                                >= config.total_time_limit - 1e-3:
                            status = "time_limit"

    if gap <= GAP_EPS:
        status = "optimal"
    emit("scatter" if "scatter" in timings else "bnb", incumbent_obj,
         lower_bound, "done")
    breakdown = evaluate_objective(instance, incumbent_roster, weights, context)
    return OptimizationResult(
        roster=incumbent_roster, objective=breakdown, gap=gap,
        lower_bound=min(lower_bound, incumbent_obj), status=status,
        phase_timings=timings, trace=trace, scatter_trace=scatter_trace)


def _run_bnb(model, bnb_config, progress, stop_when_pool_full, should_stop,
             incumbent=None):
    """B&B with the hybrid's phase-1 exit: stop as soon as the pool is full
    and a finite bound exists.  Uses the callback's return value to request
    the stop."""

    def guarded(info):
        progress(info)
        if should_stop is not None and should_stop():
            return True
        return (stop_when_pool_full and info["pool_full"]
                and np.isfinite(info["best_bound"]))

    return solve_bnb(model, bnb_config, progress=guarded, incumbent=incumbent)


def optimize(
    instance: RosterInstance,
    weights: ObjectiveWeights,
    config: HybridConfig,
    progress_sink: Optional[ProgressSink] = None,
    should_stop: Optional[Callable[[], bool]] = None,
) -> OptimizationResult:
    """Build the base model for the instance and run the chosen pipeline."""
    model, var_map = build_milp(instance, weights)
    return optimize_model(model, var_map, instance, weights, config,
                          progress_sink, should_stop=should_stop)
