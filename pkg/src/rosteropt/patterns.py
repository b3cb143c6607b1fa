"""Company-defined work patterns: an 8-week day-label grid, rotated by
starting week, expanded into assignment tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ALL_DAY, BLOCKS_PER_DAY, DAYS_PER_WEEK, EIGHT_HOUR, REST_LABEL, SLOT_LABELS,
    RosterInstance, block_index,
)

PATTERN_WEEKS = 8
N_VARIANTS = 8


@dataclass
class WorkPattern:
    """Base pattern: ``grid[week][day]`` is a day label such as ``M``, ``A``,
    ``N``, ``P``, ``OM`` or ``-``."""

    grid: list[list[str]]

    def __post_init__(self):
        if len(self.grid) != PATTERN_WEEKS or any(len(row) != DAYS_PER_WEEK
                                                  for row in self.grid):
            raise ValueError("pattern grid must be 8 weeks x 7 days")

    def day_label(self, variant: int, week: int, day_of_week: int) -> str:
        return self.grid[(week + variant) % PATTERN_WEEKS][day_of_week]


def _resolve_label(instance: RosterInstance, label: str) -> tuple[int, int | None]:
    """Map a day label to (shift type, slot or None for all-day)."""
    if label in SLOT_LABELS:
        eight = [k for k in range(instance.n_shift_types)
                 if instance.shift_kinds[k] == EIGHT_HOUR]
        if len(eight) != 1:
            raise ValueError(
                f"label {label!r} needs exactly one eight-hour shift type, "
                f"found {len(eight)}")
        return eight[0], SLOT_LABELS.index(label)
    try:
        k = instance.shift_labels.index(label)
    except ValueError:
        raise ValueError(f"pattern references unknown shift type {label!r}") from None
    if instance.shift_kinds[k] != ALL_DAY:
        raise ValueError(f"bare label {label!r} must name an all-day shift type")
    return k, None


def variant_tensor(instance: RosterInstance, pattern: WorkPattern,
                   variant: int) -> np.ndarray:
    """(m, s) binary schedule implied by the pattern for one employee."""
    out = np.zeros((instance.n_blocks, instance.n_shift_types), dtype=np.int8)
    for d in range(instance.n_days):
        week, dow = d // DAYS_PER_WEEK, d % DAYS_PER_WEEK
        label = pattern.day_label(variant, week, dow)
        if label == REST_LABEL:
            continue
        k, slot = _resolve_label(instance, label)
        if slot is None:
            out[3 * d:3 * d + 3, k] = 1
        else:
            out[block_index(d, slot), k] = 1
    return out


def company_preference_tensor(instance: RosterInstance, pattern: WorkPattern,
                              assignment: np.ndarray) -> np.ndarray:
    """(n, m, s) tensor from a per-employee variant assignment."""
    variants = {int(v): variant_tensor(instance, pattern, int(v))
                for v in np.unique(assignment)}
    return np.stack([variants[int(assignment[e])]
                     for e in range(instance.n_employees)])


def conflict_count(instance: RosterInstance, variant: np.ndarray,
                   employee: int) -> float:
    """Conflicts between one variant schedule and the employee's parameters:
    blocked slots (availability, vacation, license) plus preference misses."""
    occupied = variant.sum(axis=1)
    blocked = (instance.availability[employee] == 0) | (instance.vacation[employee] == 1)
    c = float((occupied * blocked).sum())
    for k in range(instance.n_shift_types):
        if employee in instance.no_license[k]:
            c += float(variant[:, k].sum())
    prefs = instance.preferences[employee]
    mask = prefs != -1
    c += float(np.abs(occupied[mask] - prefs[mask]).sum())
    return c
