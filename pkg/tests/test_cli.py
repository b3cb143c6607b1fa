import json

import pytest

from rosteropt.cli import EXIT_OK, EXIT_USAGE, main
from rosteropt import check_feasibility, load_instance
from rosteropt.io import import_roster_csv


def run(argv):
    return main([str(a) for a in argv])


def test_generate_and_check(tmp_path):
    inst_path = tmp_path / "inst.json"
    assert run(["generate", "--toy", "--seed", 5, "--employees", 3, "--weeks", 1, "--out", inst_path]) == EXIT_OK
    assert inst_path.exists()
    assert run(["check", inst_path]) == EXIT_OK


def test_solve_writes_artifacts(tmp_path, capsys):
    inst_path = tmp_path / "inst.json"
    out_dir = tmp_path / "run"
    run(["generate", "--toy", "--seed", 2, "--employees", 3, "--weeks", 1, "--out", inst_path])
    code = run(["solve", inst_path, "--out", out_dir,
                "--time-limit", 25, "--seed", 0])
    assert code == EXIT_OK
    result = json.loads((out_dir / "result.json").read_text())
    assert result["status"] in ("optimal", "gap_reached", "time_limit", "stalled")
    assert (out_dir / "roster.csv").exists()
    assert (out_dir / "trace.ndjson").exists()
    inst = load_instance(inst_path)
    roster = import_roster_csv(inst, out_dir / "roster.csv")
    assert check_feasibility(inst, roster).feasible


def test_check_detects_infeasible_roster(tmp_path):
    inst_path = tmp_path / "inst.json"
    run(["generate", "--toy", "--seed", 2, "--employees", 3, "--weeks", 1, "--out", inst_path])
    bad = tmp_path / "bad.csv"
    inst = load_instance(inst_path)
    from rosteropt.io import export_roster_csv
    from rosteropt.model import Roster
    export_roster_csv(inst, Roster.zeros(inst), bad)
    assert run(["check", inst_path, bad]) != EXIT_OK


def test_usage_errors(tmp_path):
    assert run(["solve", tmp_path / "missing.json"]) == EXIT_USAGE
    with pytest.raises(SystemExit):
        run(["definitely-not-a-command"])


def test_reopt_subcommand(tmp_path):
    inst_path = tmp_path / "inst.json"
    base_dir = tmp_path / "base"
    run(["generate", "--toy", "--seed", 1, "--employees", 3, "--weeks", 1, "--out", inst_path])
    run(["solve", inst_path, "--out", base_dir, "--time-limit", 25])
    changes = tmp_path / "changes.json"
    changes.write_text(json.dumps([{
        "employee": 0, "kind": "vacation", "blocks": [12, 13, 14],
        "values": [1, 1, 1], "effective_from": 12}]))
    out_dir = tmp_path / "reopt"
    code = run(["reopt", inst_path, base_dir / "roster.csv", changes,
                "--out", out_dir, "--time-limit", 25])
    assert code == EXIT_OK
    result = json.loads((out_dir / "result.json").read_text())
    assert result["objective"]["deviation"] is not None


def test_bench_smoke(tmp_path, capsys):
    code = run(["bench", "--toy", "--trials", 2, "--modes", "hybrid",
                "--employees", 3, "--weeks", 1, "--time-limit", 10])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "50%" in out or "50" in out
