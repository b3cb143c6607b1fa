import io as _io

import numpy as np
import pytest

from rosteropt import toy_instance
from rosteropt.io import (
    ParseError, export_roster_csv, import_roster_csv, instance_from_dict,
    instance_to_dict, load_instance, load_pattern, save_instance, save_pattern,
)


def test_instance_dict_round_trip():
    inst = toy_instance(0)
    back = instance_from_dict(instance_to_dict(inst))
    assert back.weeks == inst.weeks
    assert back.n_blocks == inst.n_blocks
    assert (back.availability == inst.availability).all()
    assert (back.vacation == inst.vacation).all()
    assert (back.preferences == inst.preferences).all()
    assert (back.cover == inst.cover).all()
    assert np.allclose(back.workload_targets, inst.workload_targets)
    assert back.no_license == inst.no_license
    assert back.shift_kinds == inst.shift_kinds
    assert back.forbidden_sequences == inst.forbidden_sequences


def test_instance_file_round_trip(tmp_path):
    inst = toy_instance(3, employees=4, weeks=2)
    path = tmp_path / "instance.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert (back.cover == inst.cover).all()
    assert back.min_rest_days == inst.min_rest_days


def test_instance_from_dict_rejects_garbage():
    with pytest.raises(ParseError):
        instance_from_dict({"weeks": 1})


def test_roster_csv_round_trip(tmp_path):
    inst = toy_instance(1)
    path = tmp_path / "roster.csv"
    export_roster_csv(inst, inst.witness, path)
    back = import_roster_csv(inst, path)
    assert back.same_as(inst.witness)


def test_roster_csv_has_summary_comments(tmp_path):
    inst = toy_instance(1)
    path = tmp_path / "roster.csv"
    export_roster_csv(inst, inst.witness, path)
    text = path.read_text()
    assert any(line.startswith("#") for line in text.splitlines())


def test_import_rejects_wrong_shape(tmp_path):
    inst = toy_instance(1)
    other = toy_instance(1, employees=4)
    path = tmp_path / "roster.csv"
    export_roster_csv(other, other.witness, path)
    with pytest.raises(ParseError):
        import_roster_csv(inst, path)


def test_pattern_round_trip(tmp_path):
    grid = [["M", "A", "N", "P", "-", "M", "-"] for _ in range(8)]
    from rosteropt.patterns import WorkPattern
    pattern = WorkPattern([list(r) for r in grid])
    path = tmp_path / "pattern.txt"
    save_pattern(pattern, path)
    back = load_pattern(path)
    assert back.grid == pattern.grid


def test_pattern_parser_rejects_short_grid():
    with pytest.raises(ParseError):
        load_pattern(_io.StringIO("M A N P - M -\n"))
