"""Domain types for the rostering problem.

Time is discretized into 8-hour blocks, three per day (morning/afternoon/
night), seven days per week.  A roster assigns employees to shift types per
block.  Shift types are either ``eight_hour`` (occupy a single block) or
``all_day`` (occupy all three blocks of a day).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

BLOCKS_PER_DAY = 3
DAYS_PER_WEEK = 7
BLOCKS_PER_WEEK = BLOCKS_PER_DAY * DAYS_PER_WEEK  # 21

SLOT_LABELS = ("M", "A", "N")
REST_LABEL = "-"

EIGHT_HOUR = "eight_hour"
ALL_DAY = "all_day"

#: sentinel for "no preference" in the preference matrix
NO_PREF = -1


def block_index(day: int, slot: int) -> int:
    return BLOCKS_PER_DAY * day + slot


def day_of_block(j: int) -> int:
    return j // BLOCKS_PER_DAY


def slot_of_block(j: int) -> int:
    return j % BLOCKS_PER_DAY


def weekday_of_block(j: int) -> int:
    """0 = Monday .. 5 = Saturday, 6 = Sunday."""
    return day_of_block(j) % DAYS_PER_WEEK


def sunday_blocks(weeks: int) -> np.ndarray:
    m = BLOCKS_PER_WEEK * weeks
    js = np.arange(m)
    return js[(js // BLOCKS_PER_DAY) % DAYS_PER_WEEK == 6]


def weekend_blocks(weeks: int) -> np.ndarray:
    m = BLOCKS_PER_WEEK * weeks
    js = np.arange(m)
    return js[(js // BLOCKS_PER_DAY) % DAYS_PER_WEEK >= 5]


def duty_blocks(kind: str) -> int:
    """Blocks occupied by one duty of the given shift kind."""
    return BLOCKS_PER_DAY if kind == ALL_DAY else 1


@dataclass(eq=False)
class RosterInstance:
    """A fully parameterized rostering problem.

    Matrices follow the (employee, block) / (block, shift type) layout.
    ``preferences`` uses 1 for "wants a shift", 0 for "wants no shift" and
    :data:`NO_PREF` for "no preference".
    """

    weeks: int
    n_employees: int
    n_shift_types: int
    n_blocks: int
    max_shifts_per_week: int
    min_shifts_per_week: int
    min_rest_days: int
    min_rest_sundays: int
    availability: np.ndarray        # (n, m) binary
    vacation: np.ndarray            # (n, m) binary
    preferences: np.ndarray         # (n, m) in {1, 0, NO_PREF}
    cover: np.ndarray               # (m, s) nonnegative int
    workload_targets: np.ndarray    # (n, s) real
    weekend_targets: np.ndarray     # (n, s) real
    no_license: tuple[frozenset[int], ...]   # per shift type
    shift_kinds: tuple[str, ...]             # per shift type
    shift_labels: tuple[str, ...]            # per shift type
    forbidden_sequences: tuple[tuple[int, int], ...] = ()
    sunday_block_set: Optional[np.ndarray] = None
    weekend_block_set: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sunday_block_set is None:
            self.sunday_block_set = sunday_blocks(self.weeks)
        if self.weekend_block_set is None:
            self.weekend_block_set = weekend_blocks(self.weeks)
        self.availability = np.asarray(self.availability, dtype=np.int8)
        self.vacation = np.asarray(self.vacation, dtype=np.int8)
        self.preferences = np.asarray(self.preferences, dtype=np.int8)
        self.cover = np.asarray(self.cover, dtype=np.int64)
        self.workload_targets = np.asarray(self.workload_targets, dtype=float)
        self.weekend_targets = np.asarray(self.weekend_targets, dtype=float)

    # -- convenience views -------------------------------------------------

    @property
    def n_days(self) -> int:
        return self.n_blocks // BLOCKS_PER_DAY

    def licensed(self, k: int) -> np.ndarray:
        """Boolean mask over employees licensed for shift type ``k``."""
        mask = np.ones(self.n_employees, dtype=bool)
        for e in self.no_license[k]:
            mask[e] = False
        return mask

    def eligible(self, e: int, j: int, k: int) -> bool:
        """Employee may in principle be assigned (license, available, no vacation)."""
        return (
            e not in self.no_license[k]
            and self.availability[e, j] == 1
            and self.vacation[e, j] == 0
        )

    def duty_blocks(self, k: int) -> int:
        return duty_blocks(self.shift_kinds[k])

    def with_updates(self, **kwargs) -> "RosterInstance":
        return replace(self, **kwargs)


@dataclass(eq=False)
class Roster:
    """Binary assignment tensor: x[e, j, k] = 1 iff employee e works type k in block j."""

    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int8)

    @classmethod
    def zeros(cls, instance: RosterInstance) -> "Roster":
        return cls(np.zeros(
            (instance.n_employees, instance.n_blocks, instance.n_shift_types),
            dtype=np.int8))

    def copy(self) -> "Roster":
        return Roster(self.x.copy())

    def same_as(self, other: "Roster") -> bool:
        return self.x.shape == other.x.shape and bool(np.array_equal(self.x, other.x))

    def key(self) -> bytes:
        """Hashable identity of the assignment, used for duplicate detection."""
        return self.x.tobytes()


@dataclass
class ObjectiveWeights:
    """Weights of the multi-part objective.

    ``lam[i]`` and ``theta[i]`` weight the i-th objective pair (sum norm vs
    max norm).  ``gamma`` trades individual vs company-pattern preferences
    (pattern mode only); ``mu`` weights the deviation term in event-driven
    re-optimization.
    """

    lam: tuple[float, float, float] = (1.0, 1.0, 1.0)
    theta: tuple[float, float, float] = (0.7, 0.7, 1.0)
    gamma: float = 1.0
    mu: float = 1.0

    def validate(self) -> None:
        for v in (*self.lam, *self.theta, self.gamma):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"weight {v} outside [0, 1]")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")


@dataclass
class ObjectiveBreakdown:
    total: float
    f1: float
    f1_max: float
    f2: float
    f2_max: float
    f3: float
    f4: Optional[float] = None          # pattern deviation
    deviation: Optional[float] = None   # event-driven Hamming deviation

    def as_dict(self) -> dict:
        d = {
            "total": self.total,
            "f1": self.f1, "f1_max": self.f1_max,
            "f2": self.f2, "f2_max": self.f2_max,
            "f3": self.f3,
        }
        if self.f4 is not None:
            d["f4"] = self.f4
        if self.deviation is not None:
            d["deviation"] = self.deviation
        return d


@dataclass
class Violation:
    constraint: str
    employee: Optional[int]
    block: Optional[int]
    shift_type: Optional[int]
    description: str


@dataclass
class FeasibilityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def add(self, constraint: str, description: str,
            employee: Optional[int] = None, block: Optional[int] = None,
            shift_type: Optional[int] = None) -> None:
        self.violations.append(
            Violation(constraint, employee, block, shift_type, description))


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems
