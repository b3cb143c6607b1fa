"""File formats: JSON instances, CSV rosters and plain-text pattern grids.

The roster CSV is one row per employee with a day-block label per column
(``M``/``A``/``N`` slot suffix for 8-hour types, bare label for all-day
types, ``-`` for rest); summary statistics ride along as ``#`` comment
lines so the file stays a valid single-table CSV for spreadsheet tools.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Optional, TextIO, Union

import numpy as np

from .model import (
    ALL_DAY, BLOCKS_PER_DAY, REST_LABEL, SLOT_LABELS, Roster, RosterInstance,
)
from .feasibility import count_rest_days, rest_sundays
from .objective import weekend_workload_matrix, workload_matrix
from .patterns import PATTERN_WEEKS, WorkPattern

FORMAT_VERSION = 1

PathLike = Union[str, Path]


class ParseError(ValueError):
    """Malformed input file; carries a line or field locator when known."""

    def __init__(self, message: str, line: Optional[int] = None,
                 field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.line = line
        self.field = field


# ---------------------------------------------------------------------------
# instance JSON

def instance_to_dict(instance: RosterInstance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "weeks": instance.weeks,
        "n_employees": instance.n_employees,
        "n_shift_types": instance.n_shift_types,
        "max_shifts_per_week": instance.max_shifts_per_week,
        "min_shifts_per_week": instance.min_shifts_per_week,
        "min_rest_days": instance.min_rest_days,
        "min_rest_sundays": instance.min_rest_sundays,
        "shift_labels": list(instance.shift_labels),
        "shift_kinds": list(instance.shift_kinds),
        "no_license": [sorted(group) for group in instance.no_license],
        "forbidden_sequences": [list(p) for p in instance.forbidden_sequences],
        "availability": instance.availability.tolist(),
        "vacation": instance.vacation.tolist(),
        "preferences": instance.preferences.tolist(),
        "cover": instance.cover.tolist(),
        "workload_targets": instance.workload_targets.tolist(),
        "weekend_targets": instance.weekend_targets.tolist(),
    }


def instance_from_dict(data: dict) -> RosterInstance:
    try:
        version = data["format_version"]
        if version != FORMAT_VERSION:
            raise ParseError(f"unsupported format_version {version}")
        return RosterInstance(
            weeks=int(data["weeks"]),
            n_employees=int(data["n_employees"]),
            n_shift_types=int(data["n_shift_types"]),
            n_blocks=21 * int(data["weeks"]),
            max_shifts_per_week=int(data["max_shifts_per_week"]),
            min_shifts_per_week=int(data["min_shifts_per_week"]),
            min_rest_days=int(data["min_rest_days"]),
            min_rest_sundays=int(data["min_rest_sundays"]),
            availability=np.array(data["availability"], dtype=np.int8),
            vacation=np.array(data["vacation"], dtype=np.int8),
            preferences=np.array(data["preferences"], dtype=np.int8),
            cover=np.array(data["cover"], dtype=np.int64),
            workload_targets=np.array(data["workload_targets"], dtype=float),
            weekend_targets=np.array(data["weekend_targets"], dtype=float),
            no_license=tuple(frozenset(g) for g in data["no_license"]),
            shift_kinds=tuple(data["shift_kinds"]),
            shift_labels=tuple(data["shift_labels"]),
            forbidden_sequences=tuple(tuple(p) for p in
                                      data["forbidden_sequences"]),
        )
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", field=exc.args[0])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed instance data: {exc}")


def save_instance(instance: RosterInstance, path: PathLike) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance)) + "\n")


def load_instance(path: PathLike) -> RosterInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno)
    return instance_from_dict(data)


# ---------------------------------------------------------------------------
# roster CSV

def _cell_labels(instance: RosterInstance, x_day: np.ndarray) -> str:
    """Label for one employee-day: x_day is (3, s)."""
    parts = []
    for k in range(instance.n_shift_types):
        if instance.shift_kinds[k] == ALL_DAY:
            if x_day[0, k]:
                parts.append(instance.shift_labels[k])
        else:
            for slot in range(BLOCKS_PER_DAY):
                if x_day[slot, k]:
                    parts.append(f"{instance.shift_labels[k]}:{SLOT_LABELS[slot]}")
    return "+".join(parts) if parts else REST_LABEL


def export_roster_csv(instance: RosterInstance, roster: Roster,
                      out: Union[PathLike, TextIO]) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    n_days = instance.n_days
    writer.writerow(["employee"] + [f"d{d + 1}" for d in range(n_days)])
    x = roster.x
    for e in range(instance.n_employees):
        cells = [_cell_labels(instance, x[e, 3 * d:3 * d + 3])
                 for d in range(n_days)]
        writer.writerow([f"e{e + 1}"] + cells)

    W = workload_matrix(instance, x)
    WG = weekend_workload_matrix(instance, x)
    lines = [buf.getvalue().rstrip("\n")]
    for e in range(instance.n_employees):
        loads = " ".join(
            f"{instance.shift_labels[k]}={W[e, k]:g}/{instance.workload_targets[e, k]:g}"
            for k in range(instance.n_shift_types))
        lines.append(
            f"# e{e + 1}: duties {loads}; weekend {WG[e].sum():g}; "
            f"rest_days {count_rest_days(instance, roster, e)}; "
            f"rest_sundays {rest_sundays(instance, roster, e)}")
    text = "\n".join(lines) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text)


def import_roster_csv(instance: RosterInstance,
                      source: Union[PathLike, TextIO]) -> Roster:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    rows = [(i + 1, line) for i, line in enumerate(text.splitlines())
            if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty roster file")
    reader = csv.reader(line for _, line in rows)
    header = next(reader)
    if not header or header[0] != "employee":
        raise ParseError("first column must be 'employee'", line=rows[0][0])
    n_days = instance.n_days
    if len(header) != n_days + 1:
        raise ParseError(f"expected {n_days} day columns, found {len(header) - 1}",
                         line=rows[0][0])

    label_to_type = {lab: k for k, lab in enumerate(instance.shift_labels)}
    slot_of = {lab: i for i, lab in enumerate(SLOT_LABELS)}
    x = np.zeros((instance.n_employees, instance.n_blocks,
                  instance.n_shift_types), dtype=np.int8)
    seen = 0
    for row_pos, row in enumerate(reader):
        lineno = rows[row_pos + 1][0]
        if len(row) != n_days + 1:
            raise ParseError("wrong column count", line=lineno)
        try:
            e = int(row[0].lstrip("e")) - 1
        except ValueError:
            raise ParseError(f"bad employee id {row[0]!r}", line=lineno,
                             field="employee")
        if not (0 <= e < instance.n_employees):
            raise ParseError(f"employee id {row[0]!r} out of range", line=lineno)
        for d, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == REST_LABEL or not cell:
                continue
            for part in cell.split("+"):
                label, _, slot_label = part.partition(":")
                if label not in label_to_type:
                    raise ParseError(f"unknown shift label {label!r}",
                                     line=lineno, field=f"d{d + 1}")
                k = label_to_type[label]
                if instance.shift_kinds[k] == ALL_DAY:
                    if slot_label:
                        raise ParseError(
                            f"all-day shift {label!r} cannot carry a slot",
                            line=lineno, field=f"d{d + 1}")
                    x[e, 3 * d:3 * d + 3, k] = 1
                else:
                    if slot_label not in slot_of:
                        raise ParseError(f"bad slot {slot_label!r} for {label!r}",
                                         line=lineno, field=f"d{d + 1}")
                    x[e, 3 * d + slot_of[slot_label], k] = 1
        seen += 1
    if seen != instance.n_employees:
        raise ParseError(f"expected {instance.n_employees} employee rows, "
                         f"found {seen}")
    return Roster(x)


# ---------------------------------------------------------------------------
# pattern files

def load_pattern(source: Union[PathLike, TextIO]) -> WorkPattern:
    """8 non-comment lines of 7 whitespace-separated day labels."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    grid = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = stripped.split()
        if len(cells) != 7:
            raise ParseError(f"expected 7 day labels, found {len(cells)}",
                             line=lineno)
        grid.append(cells)
    if len(grid) != PATTERN_WEEKS:
        raise ParseError(f"expected {PATTERN_WEEKS} pattern weeks, "
                         f"found {len(grid)}")
    return WorkPattern(grid)


def save_pattern(pattern: WorkPattern, path: PathLike) -> None:
    lines = [" ".join(row) for row in pattern.grid]
    Path(path).write_text("\n".join(lines) + "\n")
