import numpy as np
import pytest

from rosteropt.model import (
    BLOCKS_PER_DAY, BLOCKS_PER_WEEK, DAYS_PER_WEEK, ObjectiveWeights, Roster,
    block_index, day_of_block, slot_of_block, sunday_blocks, weekday_of_block,
    weekend_blocks,
)
from rosteropt import toy_instance


def test_block_arithmetic_round_trip():
    for day in range(14):
        for slot in range(BLOCKS_PER_DAY):
            j = block_index(day, slot)
            assert day_of_block(j) == day
            assert slot_of_block(j) == slot


def test_weekday_of_block():
    assert weekday_of_block(0) == 0                      # Monday morning
    assert weekday_of_block(BLOCKS_PER_DAY * 6) == 6     # first Sunday
    assert weekday_of_block(BLOCKS_PER_WEEK) == 0        # next Monday


def test_sunday_and_weekend_blocks():
    sun = sunday_blocks(2)
    assert len(sun) == 2 * BLOCKS_PER_DAY
    assert all(weekday_of_block(j) == 6 for j in sun)
    wk = weekend_blocks(2)
    assert len(wk) == 2 * 2 * BLOCKS_PER_DAY
    assert all(weekday_of_block(j) >= 5 for j in wk)
    assert set(sun).issubset(set(wk))


def test_roster_identity_helpers():
    inst = toy_instance(0)
    r = Roster.zeros(inst)
    r2 = r.copy()
    assert r.same_as(r2) and r.key() == r2.key()
    r2.x[0, 0, 0] = 1
    assert not r.same_as(r2) and r.key() != r2.key()


def test_weights_validation():
    ObjectiveWeights().validate()
    with pytest.raises(ValueError):
        ObjectiveWeights(lam=(1.2, 1.0, 1.0)).validate()
    with pytest.raises(ValueError):
        ObjectiveWeights(mu=-0.5).validate()


def test_instance_dimensions_consistent():
    inst = toy_instance(3, employees=4, weeks=2)
    assert inst.n_blocks == 2 * BLOCKS_PER_WEEK
    assert inst.n_days == 2 * DAYS_PER_WEEK
    assert inst.availability.shape == (4, inst.n_blocks)
    assert inst.cover.shape == (inst.n_blocks, inst.n_shift_types)
