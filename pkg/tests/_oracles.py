"""Independent reference implementations used to cross-check the engine.

Everything here favors clarity over speed: explicit loops, no reuse of the
production code paths being verified.
"""

from __future__ import annotations

import itertools

import numpy as np

from rosteropt.model import ALL_DAY, NO_PREF, Roster
from rosteropt.feasibility import check_feasibility, feasible_fast


def naive_rest_days(x_e: np.ndarray) -> int:
    """Count floor(L/3) over maximal runs of L shift-free blocks."""
    occupied = x_e.sum(axis=1) > 0
    total = 0
    run = 0
    for j in range(len(occupied)):
        if occupied[j]:
            total += run // 3
            run = 0
        else:
            run += 1
    return total + run // 3


def naive_evaluate(instance, roster, weights, original=None,
                   company_pattern=None) -> float:
    """Loop-based objective evaluation, mirroring the published formulas."""
    x = roster.x
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types
    lam, theta = weights.lam, weights.theta

    f1 = 0.0
    f1_max = 0.0
    f2 = 0.0
    f2_max = 0.0
    for k in range(s):
        per_duty = 3 if instance.shift_kinds[k] == ALL_DAY else 1
        worst1 = 0.0
        worst2 = 0.0
        for e in range(n):
            total = sum(int(x[e, j, k]) for j in range(m)) / per_duty
            dev = abs(instance.workload_targets[e, k] - total)
            f1 += dev
            worst1 = max(worst1, dev)
            wk_total = sum(int(x[e, j, k]) for j in instance.weekend_block_set) / per_duty
            wdev = abs(instance.weekend_targets[e, k] - wk_total)
            f2 += wdev
            worst2 = max(worst2, wdev)
        f1_max += worst1
        f2_max += worst2

    f3 = 0.0
    for e in range(n):
        for j in range(m):
            if instance.preferences[e, j] == NO_PREF:
                continue
            works = 1 if x[e, j, :].sum() > 0 else 0
            f3 += abs(works - int(instance.preferences[e, j]))

    total = (lam[0] * (theta[0] * f1 + (1 - theta[0]) * f1_max)
             + lam[1] * (theta[1] * f2 + (1 - theta[1]) * f2_max))

    if company_pattern is not None:
        f4 = float(np.abs(x.astype(int) - company_pattern.astype(int)).sum())
        total += lam[2] * theta[2] * (weights.gamma * f3
                                      + (1 - weights.gamma) * f4)
    else:
        total += lam[2] * theta[2] * f3
    if original is not None:
        total += weights.mu * float(
            np.abs(x.astype(int) - original.x.astype(int)).sum())
    return total


def _demand_cells(instance):
    """Decision cells: (kind, k, block-or-day, demand)."""
    cells = []
    for k in range(instance.n_shift_types):
        if instance.shift_kinds[k] == ALL_DAY:
            for d in range(instance.n_days):
                demand = int(instance.cover[3 * d, k])
                if demand:
                    cells.append(("day", k, d, demand))
        else:
            for j in range(instance.n_blocks):
                demand = int(instance.cover[j, k])
                if demand:
                    cells.append(("block", k, j, demand))
    return cells


def enumerate_feasible_rosters(instance, limit=2_000_000):
    """Yield every feasible roster of a tiny instance by exhausting the
    exact-cover choices cell by cell.  Guarded by a combination limit."""
    n = instance.n_employees
    cells = _demand_cells(instance)
    options = []
    for kind, k, pos, demand in cells:
        if kind == "day":
            eligible = [e for e in range(n)
                        if all(instance.eligible(e, 3 * pos + b, k)
                               for b in range(3))]
        else:
            eligible = [e for e in range(n) if instance.eligible(e, pos, k)]
        options.append(list(itertools.combinations(eligible, demand)))

    total = 1
    for opt in options:
        total *= max(len(opt), 1)
        if total > limit:
            raise ValueError(f"enumeration too large: > {limit} combinations")

    template = np.zeros((n, instance.n_blocks, instance.n_shift_types),
                        dtype=np.int8)
    for combo in itertools.product(*options):
        x = template.copy()
        ok = True
        for (kind, k, pos, _), chosen in zip(cells, combo):
            for e in chosen:
                if kind == "day":
                    if x[e, 3 * pos:3 * pos + 3, :].sum():
                        ok = False
                        break
                    x[e, 3 * pos:3 * pos + 3, k] = 1
                else:
                    if x[e, pos, :].sum():
                        ok = False
                        break
                    x[e, pos, k] = 1
            if not ok:
                break
        if not ok:
            continue
        if feasible_fast(instance, x):
            yield Roster(x)


def brute_force_optimum(instance, weights, original=None,
                        company_pattern=None):
    """(best roster, objective); asserts at least one feasible roster."""
    best = None
    best_obj = float("inf")
    count = 0
    for roster in enumerate_feasible_rosters(instance):
        count += 1
        obj = naive_evaluate(instance, roster, weights, original=original,
                             company_pattern=company_pattern)
        if obj < best_obj - 1e-12:
            best_obj = obj
            best = roster
    assert best is not None, "no feasible roster found by enumeration"
    # belt and braces: the winner must satisfy the detailed checker too
    assert check_feasibility(instance, best).feasible
    return best, best_obj, count
