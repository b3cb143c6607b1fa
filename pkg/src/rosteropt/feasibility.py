"""Instance validation and the independent feasibility checker.

The checker evaluates every hard constraint directly on the assignment
tensor, without going through the MILP encoding.  It is the oracle that all
solver components are tested against.
"""

from __future__ import annotations

import numpy as np

from .model import (
    ALL_DAY, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, EIGHT_HOUR, NO_PREF,
    FeasibilityReport, Roster, RosterInstance, ValidationReport,
    block_index, day_of_block, slot_of_block,
)


def validate_instance(instance: RosterInstance) -> ValidationReport:
    """Report every violated structural invariant of the instance."""
    rep = ValidationReport()
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types

    if m != BLOCKS_PER_WEEK * instance.weeks:
        rep.problems.append(
            f"block count {m} != 21 * weeks ({BLOCKS_PER_WEEK * instance.weeks})")
    for name, mat, shape in [
        ("availability", instance.availability, (n, m)),
        ("vacation", instance.vacation, (n, m)),
        ("preferences", instance.preferences, (n, m)),
        ("cover", instance.cover, (m, s)),
        ("workload_targets", instance.workload_targets, (n, s)),
        ("weekend_targets", instance.weekend_targets, (n, s)),
    ]:
        if mat.shape != shape:
            rep.problems.append(f"{name} has shape {mat.shape}, expected {shape}")
    if rep.problems:
        return rep  # shape problems make the remaining checks meaningless

    for name, mat in [("availability", instance.availability),
                      ("vacation", instance.vacation)]:
        if not np.isin(mat, (0, 1)).all():
            rep.problems.append(f"{name} is not binary")
    if not np.isin(instance.preferences, (0, 1, NO_PREF)).all():
        rep.problems.append("preferences contain values outside {0, 1, null}")
    if (instance.cover < 0).any():
        rep.problems.append("cover contains negative entries")

    if len(instance.no_license) != s or len(instance.shift_kinds) != s \
            or len(instance.shift_labels) != s:
        rep.problems.append("per-shift-type metadata length mismatch")
        return rep
    for kind in instance.shift_kinds:
        if kind not in (EIGHT_HOUR, ALL_DAY):
            rep.problems.append(f"unknown shift kind {kind!r}")
    for k_prev, k_next in instance.forbidden_sequences:
        if not (0 <= k_prev < s and 0 <= k_next < s):
            rep.problems.append(
                f"forbidden sequence ({k_prev}, {k_next}) references unknown shift type")

    sset = set(int(j) for j in instance.sunday_block_set)
    wset = set(int(j) for j in instance.weekend_block_set)
    if not sset <= wset:
        rep.problems.append("Sunday blocks are not a subset of weekend blocks")
    if any(j < 0 or j >= m for j in wset):
        rep.problems.append("weekend blocks out of range")

    # all-day cover must be constant within each day
    for k in range(s):
        if instance.shift_kinds[k] == ALL_DAY:
            day_cover = instance.cover[:, k].reshape(-1, BLOCKS_PER_DAY)
            if not (day_cover == day_cover[:, :1]).all():
                rep.problems.append(
                    f"all-day shift type {k} has non-constant cover within a day")

    # necessary cover condition: enough eligible employees per demanded cell
    eligible = (instance.availability == 1) & (instance.vacation == 0)
    for k in range(s):
        lic = instance.licensed(k)
        for j in range(m):
            d = int(instance.cover[j, k])
            if d > 0:
                avail = int((eligible[:, j] & lic).sum())
                if avail < d:
                    rep.problems.append(
                        f"cover {d} for shift type {k} in block {j} exceeds the "
                        f"{avail} eligible employees")
    return rep


def count_rest_days(instance: RosterInstance, roster: Roster, employee: int) -> int:
    """Number of disjoint 24-hour rest windows in the employee's schedule.

    A maximal run of L consecutive shift-free blocks contains floor(L / 3)
    such windows.
    """
    occupied = roster.x[employee].sum(axis=1) > 0
    total = 0
    run = 0
    for busy in occupied:
        if busy:
            total += run // BLOCKS_PER_DAY
            run = 0
        else:
            run += 1
    total += run // BLOCKS_PER_DAY
    return total


def rest_sundays(instance: RosterInstance, roster: Roster, employee: int) -> int:
    """w minus the number of Sunday blocks worked (the model's literal measure)."""
    sb = instance.sunday_block_set
    return instance.weeks - int(roster.x[employee][sb, :].sum())


def count_rest_days_all(instance: RosterInstance, x: np.ndarray) -> np.ndarray:
    """Vectorized rest-day counts for all employees."""
    n = x.shape[0]
    occupied = x.sum(axis=2) > 0
    out = np.zeros(n, dtype=int)
    for e in range(n):
        # lengths of maximal free runs
        padded = np.concatenate([[True], occupied[e], [True]])
        idx = np.nonzero(padded)[0]
        runs = np.diff(idx) - 1
        out[e] = int((runs // BLOCKS_PER_DAY).sum())
    return out


def feasible_fast(instance: RosterInstance, x: np.ndarray) -> bool:
    """Vectorized yes/no version of :func:`check_feasibility`.

    Used in local-search hot loops; agreement with the full checker is
    property-tested.
    """
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types
    per_block = x.sum(axis=2)
    if (per_block > 1).any():
        return False
    for k in range(s):
        nl = list(instance.no_license[k])
        if nl and x[nl, :, k].any():
            return False
    if (per_block * (instance.availability == 0)).any():
        return False
    if (per_block * (instance.vacation == 1)).any():
        return False
    for k in range(s):
        if instance.shift_kinds[k] == ALL_DAY:
            days = x[:, :, k].reshape(n, -1, BLOCKS_PER_DAY)
            if (days != days[:, :, :1]).any():
                return False
        else:
            col = x[:, :, k]
            if (col[:, :-2] + col[:, 1:-1] + col[:, 2:] > 1).any():
                return False
            weekly = col.reshape(n, instance.weeks, BLOCKS_PER_WEEK).sum(axis=2)
            lic = instance.licensed(k)
            if (weekly[lic] > instance.max_shifts_per_week).any():
                return False
            if (weekly[lic] < instance.min_shifts_per_week).any():
                return False
    sb = instance.sunday_block_set
    if (instance.weeks - x[:, sb, :].sum(axis=(1, 2))
            < instance.min_rest_sundays).any():
        return False
    if (x.sum(axis=0) != instance.cover).any():
        return False
    if instance.min_rest_days > 0:
        if (count_rest_days_all(instance, x) < instance.min_rest_days).any():
            return False
    for k_prev, k_next in instance.forbidden_sequences:
        day_prev = x[:, :, k_prev].reshape(n, -1, BLOCKS_PER_DAY).any(axis=2)
        mornings = x[:, ::BLOCKS_PER_DAY, k_next]
        if (day_prev[:, :-1] & (mornings[:, 1:] > 0)).any():
            return False
    return True


def check_feasibility(instance: RosterInstance, roster: Roster) -> FeasibilityReport:
    """Check every hard constraint directly on the assignment tensor."""
    x = roster.x
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types
    if x.shape != (n, m, s):
        raise ValueError(f"roster shape {x.shape} does not match instance ({n}, {m}, {s})")
    rep = FeasibilityReport()

    # at most one shift type per block
    per_block = x.sum(axis=2)
    for e, j in zip(*np.nonzero(per_block > 1)):
        rep.add("one_shift_per_block",
                f"employee {e} holds {per_block[e, j]} shifts in block {j}",
                employee=int(e), block=int(j))

    # license compliance
    for k in range(s):
        for e in instance.no_license[k]:
            for j in np.nonzero(x[e, :, k])[0]:
                rep.add("license",
                        f"employee {e} lacks the license for shift type {k}",
                        employee=int(e), block=int(j), shift_type=k)

    # all-day shifts occupy all three blocks of the day
    for k in range(s):
        if instance.shift_kinds[k] != ALL_DAY:
            continue
        days = x[:, :, k].reshape(n, -1, BLOCKS_PER_DAY)
        bad = (days != days[:, :, :1]).any(axis=2)
        for e, d in zip(*np.nonzero(bad)):
            rep.add("all_day_integrity",
                    f"employee {e} works all-day type {k} for part of day {d}",
                    employee=int(e), block=int(block_index(int(d), 0)), shift_type=k)

    # availability and vacation
    worked = per_block > 0
    for e, j in zip(*np.nonzero(worked & (instance.availability == 0))):
        rep.add("availability", f"employee {e} assigned while unavailable in block {j}",
                employee=int(e), block=int(j))
    for e, j in zip(*np.nonzero(worked & (instance.vacation == 1))):
        rep.add("vacation", f"employee {e} assigned during vacation in block {j}",
                employee=int(e), block=int(j))

    # 16 hours of rest between any two eight-hour shifts of the same type
    for k in range(s):
        if instance.shift_kinds[k] != EIGHT_HOUR:
            continue
        for e in range(n):
            if e in instance.no_license[k]:
                continue
            col = x[e, :, k]
            for t in range(m - 2):
                if col[t:t + 3].sum() > 1:
                    rep.add("rest_16h",
                            f"employee {e} works type {k} twice within blocks "
                            f"{t}..{t + 2}", employee=e, block=t, shift_type=k)

    # weekly shift-count limits for eight-hour types
    for k in range(s):
        if instance.shift_kinds[k] != EIGHT_HOUR:
            continue
        weekly = x[:, :, k].reshape(n, instance.weeks, BLOCKS_PER_WEEK).sum(axis=2)
        for e in range(n):
            if e in instance.no_license[k]:
                continue
            for t in range(instance.weeks):
                c = int(weekly[e, t])
                if c > instance.max_shifts_per_week:
                    rep.add("weekly_max",
                            f"employee {e} works {c} > {instance.max_shifts_per_week} "
                            f"type-{k} shifts in week {t}", employee=e, shift_type=k)
                if c < instance.min_shifts_per_week:
                    rep.add("weekly_min",
                            f"employee {e} works {c} < {instance.min_shifts_per_week} "
                            f"type-{k} shifts in week {t}", employee=e, shift_type=k)

    # rest Sundays
    for e in range(n):
        rs = rest_sundays(instance, roster, e)
        if rs < instance.min_rest_sundays:
            rep.add("rest_sundays",
                    f"employee {e} has {rs} < {instance.min_rest_sundays} rest Sundays",
                    employee=e)

    # exact cover
    counts = x.sum(axis=0)
    for j, k in zip(*np.nonzero(counts != instance.cover)):
        rep.add("cover",
                f"block {j} type {k}: {counts[j, k]} assigned, "
                f"{instance.cover[j, k]} required", block=int(j), shift_type=int(k))

    # minimum rest days
    for e in range(n):
        rd = count_rest_days(instance, roster, e)
        if rd < instance.min_rest_days:
            rep.add("rest_days",
                    f"employee {e} has {rd} < {instance.min_rest_days} rest days",
                    employee=e)

    # forbidden shift-type sequences: k_prev on day d forbids k_next on the
    # morning of day d + 1
    for k_prev, k_next in instance.forbidden_sequences:
        day_prev = x[:, :, k_prev].reshape(n, -1, BLOCKS_PER_DAY).sum(axis=2) > 0
        for e in range(n):
            for d in range(instance.n_days - 1):
                if day_prev[e, d] and x[e, block_index(d + 1, 0), k_next]:
                    rep.add("forbidden_sequence",
                            f"employee {e} works type {k_next} on the morning after "
                            f"a type-{k_prev} day (day {d})",
                            employee=e, block=int(block_index(d + 1, 0)),
                            shift_type=k_next)
    return rep
