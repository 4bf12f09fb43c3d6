"""Effort accounting for DGML-based versus conventional UI design.

Hours are kept as :class:`~decimal.Decimal` so that sums and differences
are exact.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Sequence

DGML_COLUMNS = ("project", "rf_hours", "dg_hours", "ace_hours")
CONVENTIONAL_COLUMNS = ("project", "design_hours", "user_hours")
REPORT_COLUMNS = ("project", "ted", "conventional_total", "savings")
TOTAL_LABEL = "TOTAL"


class EffortError(ValueError):
    pass


class InvalidEffortRecord(EffortError):
    pass


class ProjectMismatch(EffortError):
    pass


def hours(value) -> Decimal:
    """Coerce ``value`` to a non-negative, finite Decimal."""
    try:
        result = Decimal(str(value).strip())
    except InvalidOperation:
        raise InvalidEffortRecord(f"not a number of hours: {value!r}") from None
    if not result.is_finite() or result < 0:
        raise InvalidEffortRecord(f"hours must be finite and non-negative, got {value!r}")
    return result


@dataclass(frozen=True)
class DgmlEffortRecord:
    project: str
    rf_hours: Decimal
    dg_hours: Decimal
    ace_hours: Decimal

    def __post_init__(self):
        for name in ("rf_hours", "dg_hours", "ace_hours"):
            object.__setattr__(self, name, hours(getattr(self, name)))


@dataclass(frozen=True)
class ConventionalEffortRecord:
    project: str
    design_hours: Decimal
    user_hours: Decimal

    def __post_init__(self):
        for name in ("design_hours", "user_hours"):
            object.__setattr__(self, name, hours(getattr(self, name)))


def compute_ted(record: DgmlEffortRecord) -> Decimal:
    """Total effort of the DGML path: framing + generation + client feedback."""
    return record.rf_hours + record.dg_hours + record.ace_hours


def conventional_total(record: ConventionalEffortRecord) -> Decimal:
    return record.design_hours + record.user_hours


@dataclass(frozen=True)
class ReportRow:
    project: str
    ted: Decimal
    conventional_total: Decimal
    savings: Decimal


@dataclass(frozen=True)
class EffortReport:
    rows: tuple[ReportRow, ...]
    totals: ReportRow

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in (*self.rows, self.totals):
            writer.writerow([row.project, row.ted, row.conventional_total, row.savings])
        return buf.getvalue()

    def to_table(self) -> str:
        cells = [list(REPORT_COLUMNS)] + [
            [r.project, str(r.ted), str(r.conventional_total), str(r.savings)]
            for r in (*self.rows, self.totals)
        ]
        return format_table(cells)

    def to_json(self) -> dict:
        return {
            "rows": [_row_json(r) for r in self.rows],
            "totals": _row_json(self.totals),
        }


@dataclass(frozen=True)
class InvolvementRow:
    project: str
    user_hours: Decimal
    ace_hours: Decimal


def as_number(value: Decimal) -> int | float:
    return int(value) if value == value.to_integral_value() else float(value)


def _row_json(row: ReportRow) -> dict:
    return {
        "project": row.project,
        "ted": as_number(row.ted),
        "conventional_total": as_number(row.conventional_total),
        "savings": as_number(row.savings),
    }


def format_table(cells: list[list[str]]) -> str:
    """Left-align the first column, right-align the rest."""
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = []
    for row in cells:
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
    return "\n".join(lines) + "\n"


def _keyed(records: Sequence, what: str) -> dict:
    keyed = {}
    for record in records:
        if record.project in keyed:
            raise ProjectMismatch(f"project {record.project!r} appears twice in the {what} records")
        keyed[record.project] = record
    return keyed


def _join(dgml: Sequence[DgmlEffortRecord], conv: Sequence[ConventionalEffortRecord]):
    left = _keyed(dgml, "DGML")
    right = _keyed(conv, "conventional")
    for project in left:
        if project not in right:
            raise ProjectMismatch(f"project {project!r} has no conventional record")
    for project in right:
        if project not in left:
            raise ProjectMismatch(f"project {project!r} has no DGML record")
    return [(record, right[record.project]) for record in dgml]


def comparison_report(
    dgml: Sequence[DgmlEffortRecord], conv: Sequence[ConventionalEffortRecord]
) -> EffortReport:
    """Per-project TED against conventional total, rows in ``dgml`` order."""
    rows = []
    for d, c in _join(dgml, conv):
        ted, total = compute_ted(d), conventional_total(c)
        rows.append(ReportRow(d.project, ted, total, total - ted))
    totals = ReportRow(
        TOTAL_LABEL,
        sum((r.ted for r in rows), Decimal(0)),
        sum((r.conventional_total for r in rows), Decimal(0)),
        sum((r.savings for r in rows), Decimal(0)),
    )
    return EffortReport(tuple(rows), totals)


def involvement_report(
    dgml: Sequence[DgmlEffortRecord], conv: Sequence[ConventionalEffortRecord]
) -> list[InvolvementRow]:
    """Pair conventional end-user hours with agile-client hours."""
    return [InvolvementRow(d.project, c.user_hours, d.ace_hours) for d, c in _join(dgml, conv)]


def _read_rows(path: str | os.PathLike, columns: tuple[str, ...]) -> Iterable[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in columns if c not in header]
        if missing:
            raise InvalidEffortRecord(f"{path}: header lacks column(s) {', '.join(missing)}")
        reader.fieldnames = header
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            rows.append({c: (row[c] or "").strip() for c in columns})
            if not rows[-1]["project"]:
                raise InvalidEffortRecord(f"{path}:{lineno}: empty project name")
        return rows


def _load(path, columns, factory):
    records = []
    for row in _read_rows(path, columns):
        try:
            records.append(factory(**row))
        except InvalidEffortRecord as exc:
            raise InvalidEffortRecord(f"{path}: project {row['project']!r}: {exc}") from None
    return records


def load_dgml_efforts(path: str | os.PathLike) -> list[DgmlEffortRecord]:
    """Read ``project,rf_hours,dg_hours,ace_hours`` rows."""
    return _load(path, DGML_COLUMNS, DgmlEffortRecord)


def load_conventional_efforts(path: str | os.PathLike) -> list[ConventionalEffortRecord]:
    """Read ``project,design_hours,user_hours`` rows."""
    return _load(path, CONVENTIONAL_COLUMNS, ConventionalEffortRecord)
