import numpy as np
import pytest

from rosteropt import (
    ChangeRequest, GeneratorConfig, HybridConfig, ObjectiveWeights, adjust_targets,
    check_feasibility, optimize, optimize_with_patterns, plan_rolling_horizon,
    reoptimize_event, toy_instance,
)
from rosteropt.extensions import ConflictingChangesError, apply_changes
from rosteropt.model import NO_PREF
from rosteropt.patterns import WorkPattern

W = ObjectiveWeights()
FAST = HybridConfig(seed=0, total_time_limit=25, phase1_time_budget=10)


def toy_pattern():
    grid = [["M", "A", "-", "P", "-", "M", "-"] for _ in range(8)]
    return WorkPattern([list(row) for row in grid])


def test_change_request_validation():
    with pytest.raises(ValueError):
        ChangeRequest(0, "unknown", [3], [1], effective_from=0)
    with pytest.raises(ValueError):
        ChangeRequest(0, "vacation", [2], [1], effective_from=5)  # before lock
    with pytest.raises(ValueError):
        ChangeRequest(0, "vacation", [5], [2], effective_from=5)  # bad value
    ChangeRequest(0, "preference", [5], [NO_PREF], effective_from=5)


def test_apply_changes_copy_on_write():
    inst = toy_instance(0)
    req = ChangeRequest(0, "vacation", [6, 7, 8], [1, 1, 1], effective_from=6)
    new = apply_changes(inst, [req])
    assert new is not inst
    assert inst.vacation[0, 6] == 0
    assert (new.vacation[0, 6:9] == 1).all()


def test_conflicting_changes_detected():
    inst = toy_instance(0)
    a = ChangeRequest(0, "vacation", [6], [1], effective_from=6)
    b = ChangeRequest(0, "vacation", [6], [0], effective_from=6)
    with pytest.raises(ConflictingChangesError):
        apply_changes(inst, [a, b])
    # identical writes are not a conflict
    apply_changes(inst, [a, ChangeRequest(0, "vacation", [6], [1], 6)])


def test_reoptimize_noop_returns_original():
    inst = toy_instance(1)
    base = optimize(inst, W, FAST)
    res, new_inst = reoptimize_event(inst, base.roster, [], W, FAST)
    assert res.objective.deviation == 0
    assert res.roster.same_as(base.roster)
    assert new_inst is inst


def test_reoptimize_respects_lock_and_reports_deviation():
    inst = toy_instance(1)
    base = optimize(inst, W, FAST)
    # find an employee working after the lock point and put them on vacation
    lock = 9
    tail = base.roster.x[:, lock:, :].sum(axis=(1, 2))
    e = int(np.argmax(tail))
    blocks = lock + np.nonzero(base.roster.x[e, lock:, :].sum(axis=1))[0]
    req = ChangeRequest(e, "vacation", blocks, np.ones(len(blocks), dtype=int),
                        effective_from=lock)
    res, new_inst = reoptimize_event(inst, base.roster, [req], W, FAST)
    assert check_feasibility(new_inst, res.roster).feasible
    assert (res.roster.x[:, :lock, :] == base.roster.x[:, :lock, :]).all()
    assert res.objective.deviation is not None and res.objective.deviation > 0
    assert (res.roster.x[e, blocks, :] == 0).all()


def test_adjust_targets_telescopes():
    base = np.full((2, 2), 3.0)
    target_so_far = np.full((2, 2), 6.0)
    actual_so_far = np.array([[5.0, 6.0], [7.0, 6.0]])
    T, _ = adjust_targets(base, base, target_so_far, actual_so_far,
                          target_so_far, actual_so_far)
    assert T[0, 0] == 4.0   # under-worked employee gets a higher target
    assert T[1, 0] == 2.0   # over-worked employee gets a lower target
    assert T[0, 1] == 3.0


def _toy_factory(config, seed):
    return toy_instance(seed, employees=config.employees, weeks=config.weeks)


def test_rolling_horizon_runs_and_accumulates():
    cfg = GeneratorConfig(employees=3, weeks=1)
    plans = plan_rolling_horizon(cfg, periods=2, weights=W, hybrid_config=FAST,
                                 adaptive=True, seed=11,
                                 instance_factory=_toy_factory)
    assert len(plans) == 2
    for p in plans:
        assert check_feasibility(p.instance, p.roster).feasible
        assert p.workloads.shape == (3, p.instance.n_shift_types)
    # adaptive mode shifted period-2 targets by the period-1 deviation
    base = _toy_factory(cfg, 12).workload_targets
    shift = plans[0].instance.workload_targets - plans[0].workloads
    assert np.allclose(plans[1].instance.workload_targets, base + shift)


def test_pattern_pipeline():
    inst = toy_instance(2)
    res = optimize_with_patterns(
        inst, toy_pattern(), ObjectiveWeights(gamma=0.5), FAST)
    assert res.assignment.shape == (inst.n_employees,)
    assert ((0 <= res.assignment) & (res.assignment < 8)).all()
    assert res.company_pattern.shape == (
        inst.n_employees, inst.n_blocks, inst.n_shift_types)
    assert check_feasibility(inst, res.result.roster).feasible
    assert res.result.objective.f4 is not None
