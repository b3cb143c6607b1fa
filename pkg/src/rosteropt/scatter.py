"""Scatter search over feasible rosters: the improvement phase of the
hybrid pipeline.

Five subroutines: diversification (seeding the reference set from the
branch-and-bound pool), day-swap local search, reference-set update,
subset generation with new-solution filtering, and vote-based solution
combination with cover repair.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .feasibility import feasible_fast
from .model import (
    ALL_DAY, BLOCKS_PER_DAY, ObjectiveWeights, Roster, RosterInstance,
)
from .objective import EvaluationContext, employee_quality, evaluate_objective

QUALITY_EPS = 1e-6


@dataclass
class RefSetMember:
    roster: Roster
    objective: float
    is_new: bool = True


@dataclass
class RefSet:
    capacity: int = 5
    members: list[RefSetMember] = field(default_factory=list)

    def objectives(self) -> list[float]:
        return [m.objective for m in self.members]

    def best(self) -> RefSetMember:
        return self.members[0]

    def contains(self, roster: Roster) -> bool:
        return any(m.roster.same_as(roster) for m in self.members)

    def _sort(self):
        self.members.sort(key=lambda m: m.objective)


@dataclass
class LocalSearchConfig:
    initial_stall_threshold: Optional[int] = None  # default 50 * n_employees
    escalation_factor: float = 2.0

    def threshold_for(self, instance: RosterInstance) -> int:
        if self.initial_stall_threshold is not None:
            return self.initial_stall_threshold
        return 50 * instance.n_employees


@dataclass
class ScatterLimits:
    gap_target: float = 0.01
    time_limit: float = 120.0
    max_generations: int = 50


@dataclass
class GenerationRecord:
    generation: int
    best_objective: float
    gap: float
    refset_objectives: list[float]
    subsets_processed: int
    offspring_accepted: int
    offspring_rejected: int


def diversify(pool: list[tuple[Roster, float]], capacity: int = 5) -> RefSet:
    """Seed the reference set: deduplicate the pool and keep the best
    ``capacity`` members, all flagged new."""
    if not pool:
        raise ValueError("cannot diversify an empty solution pool")
    seen: set[bytes] = set()
    unique: list[tuple[Roster, float]] = []
    for roster, obj in pool:
        key = roster.key()
        if key not in seen:
            seen.add(key)
            unique.append((roster, obj))
    unique.sort(key=lambda t: t[1])
    refset = RefSet(capacity=capacity)
    for roster, obj in unique[:capacity]:
        refset.members.append(RefSetMember(roster.copy(), obj, is_new=True))
    return refset


def _swap_days(x: np.ndarray, e1: int, e2: int, day: int) -> None:
    j0 = BLOCKS_PER_DAY * day
    block = x[:, j0:j0 + BLOCKS_PER_DAY, :]
    tmp = block[e1].copy()
    block[e1] = block[e2]
    block[e2] = tmp


def improve(
    roster: Roster,
    instance: RosterInstance,
    weights: ObjectiveWeights,
    cfg: LocalSearchConfig,
    rng: np.random.Generator,
    context: Optional[EvaluationContext] = None,
    stall_threshold: Optional[int] = None,
) -> Roster:
    """Day-swap local search.

    Two employees are drawn with probability proportional to how bad their
    schedules are, a uniform random day's assignments are exchanged whole
    (cover is conserved by construction), and the swap is kept only if it
    is feasible and strictly improves the objective.
    """
    n = instance.n_employees
    if n < 2:
        return roster
    threshold = stall_threshold if stall_threshold is not None \
        else cfg.threshold_for(instance)

    current = roster.copy()
    current_obj = evaluate_objective(instance, current, weights, context).total
    qualities = np.array([employee_quality(instance, current, weights, e)
                          for e in range(n)]) + QUALITY_EPS
    stall = 0
    while stall < threshold:
        probs = qualities / qualities.sum()
        e1, e2 = rng.choice(n, size=2, replace=False, p=probs)
        day = int(rng.integers(instance.n_days))
        _swap_days(current.x, e1, e2, day)
        accepted = False
        if feasible_fast(instance, current.x):
            new_obj = evaluate_objective(instance, current, weights, context).total
            if new_obj < current_obj - 1e-12:
                current_obj = new_obj
                for e in (e1, e2):
                    qualities[e] = employee_quality(
                        instance, current, weights, int(e)) + QUALITY_EPS
                accepted = True
        if not accepted:
            _swap_days(current.x, e1, e2, day)  # revert
            stall += 1
        else:
            stall = 0
    return current


def update_refset(refset: RefSet, roster: Roster, objective: float) -> bool:
    """Insert into a below-capacity set, or replace the worst member when
    strictly better; duplicates never enter.  Returns True on change."""
    if refset.contains(roster):
        return False
    if len(refset.members) < refset.capacity:
        refset.members.append(RefSetMember(roster.copy(), objective, is_new=True))
        refset._sort()
        return True
    worst = refset.members[-1]
    if objective < worst.objective:
        refset.members[-1] = RefSetMember(roster.copy(), objective, is_new=True)
        refset._sort()
        return True
    return False


def generate_subsets(refset: RefSet) -> list[tuple[int, ...]]:
    """All 2-subsets, then each (t-1)-subset extended with the best
    non-member, deduplicated; subsets without any new member are dropped.
    All flags flip to old after emission."""
    size = len(refset.members)
    if size < 2:
        return []
    levels: list[set[frozenset[int]]] = []
    pairs = {frozenset((i, j)) for i in range(size) for j in range(i + 1, size)}
    levels.append(pairs)
    for t in range(3, size + 1):
        extended = set()
        for sub in levels[-1]:
            best_out = next(i for i in range(size) if i not in sub)
            extended.add(sub | {best_out})
        levels.append(extended)

    new_flags = [m.is_new for m in refset.members]
    out: list[tuple[int, ...]] = []
    for level in levels:
        for sub in sorted(level, key=lambda fs: tuple(sorted(fs))):
            if any(new_flags[i] for i in sub):
                out.append(tuple(sorted(sub)))
    for m in refset.members:
        m.is_new = False
    return out


def _day_signature(x: np.ndarray, e: int, day: int) -> bytes:
    j0 = BLOCKS_PER_DAY * day
    return x[e, j0:j0 + BLOCKS_PER_DAY, :].tobytes()


def combine(
    parents: list[Roster],
    instance: RosterInstance,
    weights: ObjectiveWeights,
    rng: np.random.Generator,
    context: Optional[EvaluationContext] = None,
    repair_passes: int = 3,
) -> Optional[Roster]:
    """Vote-based combination of parent rosters.

    Candidates are (employee, day, day-assignment) triplets; rest counts as
    an assignment.  Unanimous triplets are inherited directly, equal-vote
    conflicts are broken at random, and remaining cover surpluses/deficits
    are repaired heuristically.  Returns None when repair fails.
    """
    if len(parents) < 2:
        raise ValueError("combination needs at least two parents")
    n, days = instance.n_employees, instance.n_days
    n_parents = len(parents)

    # votes per (employee, day): signature -> (count, template parent index)
    votes: list[list[dict[bytes, tuple[int, int]]]] = [
        [dict() for _ in range(days)] for _ in range(n)]
    for pi, parent in enumerate(parents):
        for e in range(n):
            for d in range(days):
                sig = _day_signature(parent.x, e, d)
                cnt, first = votes[e][d].get(sig, (0, pi))
                votes[e][d][sig] = (cnt + 1, first)

    unanimous = np.zeros((n, days), dtype=bool)
    for attempt in range(repair_passes):
        x = np.zeros_like(parents[0].x)
        for e in range(n):
            for d in range(days):
                table = votes[e][d]
                top = max(cnt for cnt, _ in table.values())
                tied = [sig for sig, (cnt, _) in table.items() if cnt == top]
                sig = tied[0] if len(tied) == 1 else tied[int(rng.integers(len(tied)))]
                _, pi = votes[e][d][sig]
                j0 = BLOCKS_PER_DAY * d
                x[e, j0:j0 + BLOCKS_PER_DAY, :] = \
                    parents[pi].x[e, j0:j0 + BLOCKS_PER_DAY, :]
                unanimous[e, d] = top == n_parents

        if _repair_cover(instance, x, unanimous, rng) \
                and feasible_fast(instance, x):
            return Roster(x)
    return None


def _workloads(x: np.ndarray) -> np.ndarray:
    return x.sum(axis=(1, 2))


def _repair_cover(instance: RosterInstance, x: np.ndarray,
                  unanimous: np.ndarray, rng: np.random.Generator) -> bool:
    """Resolve cover surpluses (never touching unanimous cells) and fill
    deficits, assigning to the least-loaded eligible employees first."""
    n = instance.n_employees
    # surpluses first, duty-granular for all-day types
    for k in range(instance.n_shift_types):
        all_day = instance.shift_kinds[k] == ALL_DAY
        step = BLOCKS_PER_DAY if all_day else 1
        for j in range(0, instance.n_blocks, step):
            surplus = int(x[:, j, k].sum() - instance.cover[j, k])
            if surplus <= 0:
                continue
            d = j // BLOCKS_PER_DAY
            holders = [e for e in range(n) if x[e, j, k] and not unanimous[e, d]]
            if len(holders) < surplus:
                return False
            loads = _workloads(x)
            holders.sort(key=lambda e: -loads[e])
            for e in holders[:surplus]:
                if all_day:
                    x[e, BLOCKS_PER_DAY * d:BLOCKS_PER_DAY * (d + 1), k] = 0
                else:
                    x[e, j, k] = 0

    # deficits: least-loaded eligible employees fill in
    for k in range(instance.n_shift_types):
        all_day = instance.shift_kinds[k] == ALL_DAY
        step = BLOCKS_PER_DAY if all_day else 1
        for j in range(0, instance.n_blocks, step):
            deficit = int(instance.cover[j, k] - x[:, j, k].sum())
            if deficit <= 0:
                continue
            d = j // BLOCKS_PER_DAY
            span = slice(BLOCKS_PER_DAY * d, BLOCKS_PER_DAY * (d + 1)) \
                if all_day else slice(j, j + 1)
            loads = _workloads(x)
            order = sorted(range(n), key=lambda e: (loads[e], e))
            for e in order:
                if deficit == 0:
                    break
                if e in instance.no_license[k] or unanimous[e, d]:
                    continue
                blocks = range(span.start, span.stop)
                if any(instance.availability[e, b] == 0
                       or instance.vacation[e, b] == 1
                       or x[e, b, :].sum() > 0 for b in blocks):
                    continue
                x[e, span, k] = 1
                deficit -= 1
            if deficit > 0:
                return False
    return True


def run_scatter_search(
    instance: RosterInstance,
    weights: ObjectiveWeights,
    init: RefSet,
    lower_bound: float,
    limits: ScatterLimits,
    rng: np.random.Generator,
    ls_config: Optional[LocalSearchConfig] = None,
    context: Optional[EvaluationContext] = None,
    progress: Optional[Callable[[GenerationRecord], None]] = None,
    should_stop: Optional[Callable[[], bool]] = None,
) -> tuple[Roster, list[GenerationRecord]]:
    """Generation loop: subsets -> combine -> improve -> reference-set update.

    Terminates on gap target, stagnation (no new solutions), or time limit.
    The stall threshold of local search escalates whenever a generation
    improves the best objective by less than 10%.
    """
    from .hybrid import compute_gap

    if not init.members:
        raise ValueError("empty initial reference set")
    ls_config = ls_config or LocalSearchConfig()
    threshold = ls_config.threshold_for(instance)
    start = time.monotonic()
    trace: list[GenerationRecord] = []
    refset = init
    last_best = refset.best().objective

    for generation in range(limits.max_generations):
        gap = compute_gap(refset.best().objective, lower_bound)
        if gap <= limits.gap_target:
            break
        if time.monotonic() - start > limits.time_limit:
            break
        if should_stop is not None and should_stop():
            break

        subsets = generate_subsets(refset)
        if not subsets:
            break
        accepted = rejected = 0
        for subset in subsets:
            if time.monotonic() - start > limits.time_limit:
                break
            parents = [refset.members[i].roster for i in subset]
            child = combine(parents, instance, weights, rng, context)
            if child is None:
                rejected += 1
                continue
            improved = improve(child, instance, weights, ls_config, rng,
                               context, stall_threshold=threshold)
            obj = evaluate_objective(instance, improved, weights, context).total
            if update_refset(refset, improved, obj):
                accepted += 1
            else:
                rejected += 1

        best = refset.best().objective
        gap = compute_gap(best, lower_bound)
        trace.append(GenerationRecord(
            generation=generation, best_objective=best, gap=gap,
            refset_objectives=refset.objectives(),
            subsets_processed=len(subsets),
            offspring_accepted=accepted, offspring_rejected=rejected))
        if progress is not None:
            progress(trace[-1])

        # escalate when generation-over-generation improvement is below 10%
        if last_best > 0 and (last_best - best) / last_best < 0.10:
            threshold = int(threshold * ls_config.escalation_factor)
        last_best = best

    return refset.best().roster.copy(), trace
