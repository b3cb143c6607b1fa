"""Randomized instance generation for experiments and tests.

``generate_instance`` mirrors the benchmark setup: three shift types
(8-hour switching, all-day on-call, all-day outage planning on business
days), 95% availability, 25 vacation days per year, preferences on up to
20% of the slots, cover scaled proportionally to the workforce size.

``toy_instance`` builds tiny, provably feasible instances with sparse
cover, small enough for brute-force enumeration in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    ALL_DAY, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, DAYS_PER_WEEK, EIGHT_HOUR, NO_PREF,
    Roster, RosterInstance, block_index,
)
from .feasibility import count_rest_days, rest_sundays, validate_instance

BASE_EMPLOYEES = 12


@dataclass
class GeneratorConfig:
    employees: int = 12
    weeks: int = 8
    preference_density: float = 0.2
    availability_rate: float = 0.95
    vacation_days_per_year: int = 25
    max_shifts_per_week: int = 5
    min_shifts_per_week: int = 0
    min_rest_days: Optional[int] = None      # default: one per week
    min_rest_sundays: Optional[int] = None   # default: weeks // 4


def default_targets(instance: RosterInstance) -> tuple[np.ndarray, np.ndarray]:
    """Fair-share workload targets: total duty demand split equally among the
    licensed, not-fully-unavailable employees of each shift type."""
    n, s = instance.n_employees, instance.n_shift_types
    T = np.zeros((n, s))
    G = np.zeros((n, s))
    some_availability = (instance.availability == 1).any(axis=1)
    for k in range(s):
        per_duty = instance.duty_blocks(k)
        demand = instance.cover[:, k].sum() / per_duty
        weekend_demand = instance.cover[instance.weekend_block_set, k].sum() / per_duty
        eligible = instance.licensed(k) & some_availability
        cnt = int(eligible.sum())
        if demand > 0 and cnt == 0:
            raise ValueError(f"shift type {k} has demand but no licensed employees")
        if cnt:
            T[eligible, k] = demand / cnt
            G[eligible, k] = weekend_demand / cnt
    return T, G


def _availability(rng, n, weeks, rate):
    """Day-granular availability: an unavailable day blanks all three blocks."""
    m = BLOCKS_PER_WEEK * weeks
    A = np.ones((n, m), dtype=np.int8)
    days = weeks * DAYS_PER_WEEK
    unavailable = rng.random((n, days)) > rate
    for e, d in zip(*np.nonzero(unavailable)):
        A[e, 3 * d:3 * d + 3] = 0
    return A


def _vacation(rng, n, weeks, days_per_year):
    m = BLOCKS_PER_WEEK * weeks
    V = np.zeros((n, m), dtype=np.int8)
    days = weeks * DAYS_PER_WEEK
    horizon_vacation = int(round(days_per_year * days / 365.0))
    if horizon_vacation > days:
        raise ValueError(
            f"{horizon_vacation} vacation days exceed the {days}-day horizon")
    for e in range(n):
        for d in rng.choice(days, size=horizon_vacation, replace=False):
            V[e, 3 * d:3 * d + 3] = 1
    return V


def _preferences(rng, n, m, density):
    P = np.full((n, m), NO_PREF, dtype=np.int8)
    has_pref = rng.random((n, m)) < density
    wants = rng.random((n, m)) < 0.5
    P[has_pref & wants] = 1
    P[has_pref & ~wants] = 0
    return P


def base_cover(weeks: int, scale: int = 1) -> np.ndarray:
    """Cover for (switching, on-call, outage planning).

    Switching runs around the clock except weekend afternoons (12-hour
    weekend shifts absorb them); on-call covers every day; outage planning
    covers business days only.
    """
    m = BLOCKS_PER_WEEK * weeks
    D = np.zeros((m, 3), dtype=np.int64)
    for j in range(m):
        weekday = (j // BLOCKS_PER_DAY) % DAYS_PER_WEEK
        slot = j % BLOCKS_PER_DAY
        weekend = weekday >= 5
        D[j, 0] = 0 if (weekend and slot == 1) else 1
        D[j, 1] = 1
        D[j, 2] = 0 if weekend else 1
    return D * scale


def generate_instance(config: GeneratorConfig, seed: int) -> RosterInstance:
    """Deterministically generate a benchmark-style instance."""
    rng = np.random.default_rng(seed)
    n, weeks = config.employees, config.weeks
    m = BLOCKS_PER_WEEK * weeks

    scale = max(1, int(np.ceil(n / BASE_EMPLOYEES)))
    cover = base_cover(weeks, scale)

    min_rest_sundays = (config.min_rest_sundays
                        if config.min_rest_sundays is not None else weeks // 4)
    # the rest-Sunday row caps every employee at (weeks - l_min) Sunday
    # blocks; an all-day Sunday duty needs 3, so short horizons cannot staff
    # Sunday on-call at all -- drop that cover instead of going infeasible
    if weeks - min_rest_sundays < BLOCKS_PER_DAY:
        sunday = (np.arange(m) // BLOCKS_PER_DAY) % DAYS_PER_WEEK == 6
        cover[sunday, 1] = 0

    # everyone performs switching; half are licensed for on-call, the other
    # half for outage planning
    half = n // 2
    no_license = (frozenset(), frozenset(range(half, n)), frozenset(range(half)))

    availability = _availability(rng, n, weeks, config.availability_rate)
    vacation = _vacation(rng, n, weeks, config.vacation_days_per_year)
    preferences = _preferences(rng, n, m, config.preference_density)

    instance = RosterInstance(
        weeks=weeks,
        n_employees=n,
        n_shift_types=3,
        n_blocks=m,
        max_shifts_per_week=config.max_shifts_per_week,
        min_shifts_per_week=config.min_shifts_per_week,
        min_rest_days=config.min_rest_days if config.min_rest_days is not None else weeks,
        min_rest_sundays=min_rest_sundays,
        availability=availability,
        vacation=vacation,
        preferences=preferences,
        cover=cover,
        workload_targets=np.zeros((n, 3)),
        weekend_targets=np.zeros((n, 3)),
        no_license=no_license,
        shift_kinds=(EIGHT_HOUR, ALL_DAY, ALL_DAY),
        shift_labels=("SW", "P", "OM"),
        forbidden_sequences=((1, 0),),  # on-call day forbids next-day switching morning
    )
    T, G = default_targets(instance)
    instance.workload_targets = T
    instance.weekend_targets = G
    return instance


def toy_instance(seed: int, employees: int = 3, weeks: int = 1,
                 preference_density: float = 0.3) -> RosterInstance:
    """Small two-type instance with sparse cover, feasible by construction.

    A witness roster is sampled first (respecting availability, rest and
    weekly limits) and the cover requirements are taken from its column
    sums, so a feasible solution always exists.
    """
    rng = np.random.default_rng(seed)
    n = employees
    m = BLOCKS_PER_WEEK * weeks
    days = weeks * DAYS_PER_WEEK

    availability = _availability(rng, n, weeks, 0.9)
    vacation = np.zeros((n, m), dtype=np.int8)
    for e in range(n):
        if rng.random() < 0.3:
            d = int(rng.integers(days))
            vacation[e, 3 * d:3 * d + 3] = 1
    preferences = _preferences(rng, n, m, preference_density)

    # one employee lacks the on-call license
    no_p = int(rng.integers(n))
    no_license = (frozenset(), frozenset({no_p}))
    max_per_week = 4

    x = np.zeros((n, m, 2), dtype=np.int8)
    weekly_sw = np.zeros((n, weeks), dtype=int)
    p_yesterday = np.full(n, False)
    for d in range(days):
        week = d // DAYS_PER_WEEK
        free = [e for e in range(n)
                if availability[e, 3 * d] and not vacation[e, 3 * d]]
        p_today = np.full(n, False)
        # no all-day duty on Sundays: one would eat three Sunday blocks and
        # push the literal rest-Sunday measure negative
        if rng.random() < 0.4 and d % DAYS_PER_WEEK != 6:
            cands = [e for e in free if e != no_p]
            if cands:
                e = int(rng.choice(cands))
                x[e, 3 * d:3 * d + 3, 1] = 1
                free.remove(e)
                p_today[e] = True
        if rng.random() < 0.55:  # switching morning shift
            cands = [e for e in free
                     if weekly_sw[e, week] < max_per_week and not p_yesterday[e]]
            if cands:
                e = int(rng.choice(cands))
                x[e, block_index(d, 0), 0] = 1
                weekly_sw[e, week] += 1
        p_yesterday = p_today

    cover = x.sum(axis=0).astype(np.int64)
    witness = Roster(x)

    instance = RosterInstance(
        weeks=weeks,
        n_employees=n,
        n_shift_types=2,
        n_blocks=m,
        max_shifts_per_week=max_per_week,
        min_shifts_per_week=0,
        min_rest_days=0,
        min_rest_sundays=0,
        availability=availability,
        vacation=vacation,
        preferences=preferences,
        cover=cover,
        workload_targets=np.zeros((n, 2)),
        weekend_targets=np.zeros((n, 2)),
        no_license=no_license,
        shift_kinds=(EIGHT_HOUR, ALL_DAY),
        shift_labels=("SW", "P"),
        forbidden_sequences=((1, 0),),
    )
    instance.min_rest_days = min(count_rest_days(instance, witness, e)
                                 for e in range(n)) if n else 0
    instance.min_rest_sundays = min(rest_sundays(instance, witness, e)
                                    for e in range(n)) if n else 0
    T, G = default_targets(instance)
    instance.workload_targets = T
    instance.weekend_targets = G

    report = validate_instance(instance)
    assert report.ok, report.problems
    instance.witness = witness  # feasibility certificate, handy in tests
    return instance
