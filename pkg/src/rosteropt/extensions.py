"""Practical planning extensions on top of the core pipeline:

* event-driven re-optimization that minimizes deviation from a published
  roster when parameters change mid-horizon,
* adaptive rolling-horizon planning that carries workload imbalances into
  the next period's targets,
* two-stage integration of a company-defined work pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bnb import BnbConfig, solve_bnb
from .generator import GeneratorConfig, generate_instance
from .hybrid import (
    HybridConfig, InfeasibleInstanceError, OptimizationResult, optimize,
    optimize_model,
)
from .milp import (
    LockConflictError, build_event_driven_milp, build_pattern_stage1,
    build_pattern_stage2,
)
from .model import NO_PREF, ObjectiveWeights, Roster, RosterInstance
from .objective import (
    EvaluationContext, evaluate_objective, weekend_workload_matrix,
    workload_matrix,
)
from .patterns import WorkPattern, company_preference_tensor

__all__ = [
    "ChangeRequest", "ConflictingChangesError", "PeriodPlan",
    "RollingHorizonError", "PatternResult", "WorkPattern", "apply_changes",
    "reoptimize_event", "adjust_targets", "plan_rolling_horizon",
    "optimize_with_patterns",
]

CHANGE_KINDS = ("availability", "vacation", "preference")


@dataclass
class ChangeRequest:
    """One parameter change for one employee over a set of blocks."""

    employee: int
    kind: str
    blocks: np.ndarray
    values: np.ndarray
    effective_from: int

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=int)
        self.values = np.asarray(self.values, dtype=int)
        if self.kind not in CHANGE_KINDS:
            raise ValueError(f"unknown change kind {self.kind!r}")
        if self.blocks.shape != self.values.shape or self.blocks.ndim != 1:
            raise ValueError("blocks and values must be 1-d and equally long")
        if self.blocks.size and self.blocks.min() < self.effective_from:
            raise ValueError(
                f"change touches block {int(self.blocks.min())} before its "
                f"effective_from {self.effective_from}")
        allowed = (0, 1) if self.kind != "preference" else (NO_PREF, 0, 1)
        if not np.isin(self.values, allowed).all():
            raise ValueError(f"values for kind {self.kind!r} must be in {allowed}")


class ConflictingChangesError(ValueError):
    """Two requests assign different values to the same cell."""

    def __init__(self, employee, block, kind):
        super().__init__(
            f"conflicting {kind} changes for employee {employee}, block {block}")
        self.coordinates = (employee, block, kind)


def apply_changes(instance: RosterInstance,
                  changes: list[ChangeRequest]) -> RosterInstance:
    """Return a copy of the instance with all requests applied."""
    fields = {
        "availability": instance.availability.copy(),
        "vacation": instance.vacation.copy(),
        "preference": instance.preferences.copy(),
    }
    written: dict[tuple[str, int, int], int] = {}
    for req in changes:
        if not (0 <= req.employee < instance.n_employees):
            raise ValueError(f"employee {req.employee} out of range")
        if req.blocks.size and req.blocks.max() >= instance.n_blocks:
            raise ValueError(f"block {int(req.blocks.max())} beyond the horizon")
        target = fields[req.kind]
        for j, val in zip(req.blocks, req.values):
            key = (req.kind, req.employee, int(j))
            if key in written and written[key] != int(val):
                raise ConflictingChangesError(req.employee, int(j), req.kind)
            written[key] = int(val)
            target[req.employee, j] = val
    return instance.with_updates(
        availability=fields["availability"], vacation=fields["vacation"],
        preferences=fields["preference"])


def reoptimize_event(
    instance: RosterInstance,
    original: Roster,
    changes: list[ChangeRequest],
    weights: ObjectiveWeights,
    config: HybridConfig,
    progress_sink=None,
    should_stop=None,
) -> tuple[OptimizationResult, RosterInstance]:
    """Re-optimize after parameter changes, freezing everything before the
    earliest effective block and penalizing deviation from ``original``.

    Returns the result together with the post-change instance; the Hamming
    deviation is reported in ``result.objective.deviation``.
    """
    context = EvaluationContext(original=original)
    if not changes:
        breakdown = evaluate_objective(instance, original, weights, context)
        return OptimizationResult(
            roster=original.copy(), objective=breakdown, gap=0.0,
            lower_bound=breakdown.total, status="optimal",
            phase_timings={}, trace=[]), instance

    new_instance = apply_changes(instance, changes)
    lock_until = min(req.effective_from for req in changes)
    model, var_map = build_event_driven_milp(new_instance, original, weights,
                                             lock_until)
    result = optimize_model(model, var_map, new_instance, weights, config,
                            progress_sink=progress_sink, context=context,
                            should_stop=should_stop)
    return result, new_instance


def adjust_targets(
    base_T: np.ndarray,
    base_G: np.ndarray,
    cumulative_target_T: np.ndarray,
    cumulative_actual_T: np.ndarray,
    cumulative_target_G: np.ndarray,
    cumulative_actual_G: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Shift the next period's targets by the cumulative target-vs-actual
    deviation, separately for total and weekend workloads.  Adjusted targets
    may go negative; the deviation terms absorb that."""
    T = np.asarray(base_T, dtype=float) \
        + (np.asarray(cumulative_target_T) - np.asarray(cumulative_actual_T))
    G = np.asarray(base_G, dtype=float) \
        + (np.asarray(cumulative_target_G) - np.asarray(cumulative_actual_G))
    if T.shape != base_T.shape or G.shape != base_G.shape:
        raise ValueError("cumulative arrays must match the target shapes")
    return T, G


@dataclass
class PeriodPlan:
    period: int
    instance: RosterInstance
    roster: Roster
    workloads: np.ndarray          # (n, s) realized duties
    weekend_workloads: np.ndarray  # (n, s) realized weekend duties
    gap: float
    status: str


class RollingHorizonError(Exception):
    """A period could not be solved; carries the plan built so far."""

    def __init__(self, period: int, partial: list[PeriodPlan], cause: Exception):
        super().__init__(f"period {period} failed: {cause}")
        self.period = period
        self.partial = partial
        self.cause = cause


def plan_rolling_horizon(
    config: GeneratorConfig,
    periods: int,
    weights: ObjectiveWeights,
    hybrid_config: HybridConfig,
    adaptive: bool = True,
    seed: int = 0,
    instance_factory=None,
) -> list[PeriodPlan]:
    """Solve ``periods`` consecutive planning periods.

    Each period gets a freshly generated instance (same workforce profile,
    new availability/vacation draws).  In adaptive mode the cumulative
    base-target-minus-actual deviation of earlier periods is added to the
    next period's targets, so workload imbalances are paid back instead of
    compounding.  Rest-window bookkeeping resets at period boundaries.

    ``instance_factory(config, seed)`` overrides the default benchmark-style
    generator, e.g. for a workforce too small to carry the full cover.
    """
    if periods < 1:
        raise ValueError("periods must be >= 1")
    factory = instance_factory or generate_instance
    plans: list[PeriodPlan] = []
    cum_t = cum_a = cum_gt = cum_ga = None
    for p in range(periods):
        inst = factory(config, seed + p)
        base_T = inst.workload_targets.copy()
        base_G = inst.weekend_targets.copy()
        if adaptive and p > 0:
            T, G = adjust_targets(base_T, base_G, cum_t, cum_a, cum_gt, cum_ga)
            inst = inst.with_updates(workload_targets=T, weekend_targets=G)
        try:
            result = optimize(inst, weights, hybrid_config)
        except Exception as exc:
            raise RollingHorizonError(p, plans, exc)
        W = workload_matrix(inst, result.roster.x)
        WG = weekend_workload_matrix(inst, result.roster.x)
        plans.append(PeriodPlan(p, inst, result.roster, W, WG, result.gap,
                                result.status))
        if cum_t is None:
            cum_t, cum_a = base_T.copy(), W.copy()
            cum_gt, cum_ga = base_G.copy(), WG.copy()
        else:
            cum_t += base_T
            cum_a += W
            cum_gt += base_G
            cum_ga += WG
    return plans


@dataclass
class PatternResult:
    result: OptimizationResult
    assignment: np.ndarray        # (n,) variant index per employee
    company_pattern: np.ndarray   # (n, m, s) derived tensor
    stage1_conflicts: float


def optimize_with_patterns(
    instance: RosterInstance,
    pattern: WorkPattern,
    weights: ObjectiveWeights,
    config: HybridConfig,
    progress_sink=None,
    should_stop=None,
) -> PatternResult:
    """Two-stage pattern integration.

    Stage 1 assigns each employee a rotation variant minimizing conflicts
    with their availability, vacation, license and preferences (solved to
    optimality).  Stage 2 runs the regular pipeline with the preference term
    split between individual preferences (weight gamma) and deviation from
    the assigned pattern (weight 1 - gamma).
    """
    model1, s1map = build_pattern_stage1(instance, pattern)
    bnb_cfg = BnbConfig(pool_size=2, time_limit=config.phase1_time_budget,
                        gap_target=0.0, backend=config.backend)
    stage1 = solve_bnb(model1, bnb_cfg)
    if not stage1.pool:
        raise InfeasibleInstanceError("pattern assignment model infeasible")
    best = min(stage1.pool, key=lambda entry: entry.objective)
    assignment = s1map.decode_assignment(best.vector)
    xc = company_preference_tensor(instance, pattern, assignment)

    model2, var_map = build_pattern_stage2(instance, xc, weights)
    context = EvaluationContext(company_pattern=xc)
    result = optimize_model(model2, var_map, instance, weights, config,
                            progress_sink=progress_sink, context=context,
                            should_stop=should_stop)
    return PatternResult(result=result, assignment=assignment,
                         company_pattern=xc, stage1_conflicts=best.objective)
