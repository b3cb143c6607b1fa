"""Objective evaluation on assignment tensors.

Workload is measured in duty units: one eight-hour shift or one all-day
duty each count as 1, so an all-day block triple contributes a single unit.
Targets are expressed in the same units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    NO_PREF, ObjectiveBreakdown, ObjectiveWeights, Roster, RosterInstance,
)


@dataclass
class EvaluationContext:
    """Optional extra inputs for the extended objective modes.

    ``original`` switches on the event-driven Hamming-deviation term;
    ``company_pattern`` (with ``weights.gamma``) switches on pattern mode.
    """

    original: Optional[Roster] = None
    company_pattern: Optional[np.ndarray] = None  # (n, m, s) binary


def workload_matrix(instance: RosterInstance, x: np.ndarray) -> np.ndarray:
    """Per-(employee, shift type) workload in duty units."""
    per_type = x.sum(axis=1).astype(float)
    scale = np.array([instance.duty_blocks(k) for k in range(instance.n_shift_types)],
                     dtype=float)
    return per_type / scale


def weekend_workload_matrix(instance: RosterInstance, x: np.ndarray) -> np.ndarray:
    per_type = x[:, instance.weekend_block_set, :].sum(axis=1).astype(float)
    scale = np.array([instance.duty_blocks(k) for k in range(instance.n_shift_types)],
                     dtype=float)
    return per_type / scale


def preference_violation_matrix(instance: RosterInstance, x: np.ndarray) -> np.ndarray:
    """(n, m) matrix of per-slot preference violations (0 where no preference)."""
    occupied = x.sum(axis=2)
    viol = np.abs(occupied - instance.preferences).astype(float)
    viol[instance.preferences == NO_PREF] = 0.0
    return viol


def evaluate_objective(
    instance: RosterInstance,
    roster: Roster,
    weights: ObjectiveWeights,
    context: Optional[EvaluationContext] = None,
) -> ObjectiveBreakdown:
    """Compute all objective terms and the weighted total.

    Pure and deterministic; does not require the roster to be feasible.
    """
    context = context or EvaluationContext()
    x = roster.x

    dev1 = np.abs(instance.workload_targets - workload_matrix(instance, x))
    f1 = float(dev1.sum())
    f1_max = float(dev1.max(axis=0).sum()) if dev1.size else 0.0

    dev2 = np.abs(instance.weekend_targets - weekend_workload_matrix(instance, x))
    f2 = float(dev2.sum())
    f2_max = float(dev2.max(axis=0).sum()) if dev2.size else 0.0

    f3 = float(preference_violation_matrix(instance, x).sum())

    l1, l2, l3 = weights.lam
    t1, t2, t3 = weights.theta
    base_12 = l1 * (t1 * f1 + (1 - t1) * f1_max) + l2 * (t2 * f2 + (1 - t2) * f2_max)

    f4 = None
    if context.company_pattern is not None:
        f4 = float(np.abs(context.company_pattern.astype(float) - x).sum())
        total = base_12 + l3 * t3 * (weights.gamma * f3 + (1 - weights.gamma) * f4)
    else:
        total = base_12 + l3 * t3 * f3

    deviation = None
    if context.original is not None:
        deviation = float(np.abs(x.astype(int) - context.original.x.astype(int)).sum())
        total += weights.mu * deviation

    return ObjectiveBreakdown(total=total, f1=f1, f1_max=f1_max, f2=f2,
                              f2_max=f2_max, f3=f3, f4=f4, deviation=deviation)


def employee_quality(
    instance: RosterInstance,
    roster: Roster,
    weights: ObjectiveWeights,
    employee: int,
) -> float:
    """Employee's contribution to the separable objective parts f1 + f2 + f3.

    Summed over all employees this equals f1 + f2 + f3 exactly.
    """
    x = roster.x
    q = float(np.abs(instance.workload_targets[employee]
                     - workload_matrix(instance, x)[employee]).sum())
    q += float(np.abs(instance.weekend_targets[employee]
                      - weekend_workload_matrix(instance, x)[employee]).sum())
    q += float(preference_violation_matrix(instance, x)[employee].sum())
    return q
