"""Human-effort valuation of machine-produced corpus work.

The effort model treats residual error as decaying exponentially with
invested effort: starting from an error level ``q0`` (task completely
undone), a fully diligent effort drives error down to an operational
floor ``error_floor``. The fraction of that full effort matched by output
of accuracy ``a`` is::

    ratio(a) = ln(q0 / (1 - a)) / ln(q0 / error_floor)

An accuracy at or beyond ``1 - error_floor`` would require more than the
full diligent effort and is rejected. Equivalent-hour valuations multiply
a task's reference human-hours by the ratio truncated to three decimals
(the precision at which ratios are published), rounding half-up to whole
hours; table totals are sums of the rounded rows.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_ERROR_FLOOR = 1e-3

CORE_GROUP = "core"
EXTENSION_GROUP = "extension"


class EconomicsError(ValueError):
    pass


@dataclass(frozen=True)
class EffortModel:
    """Exponential error-decay effort model."""

    q0: float = 1.0
    error_floor: float = DEFAULT_ERROR_FLOOR

    def __post_init__(self):
        if not (0.0 < self.error_floor < self.q0):
            raise EconomicsError("error floor must lie in (0, q0)")

    def effort_ratio(self, accuracy: float) -> float:
        """Fraction of a full diligent human effort matched by output of
        the given accuracy."""
        if accuracy < 0.0:
            raise EconomicsError("accuracy must be non-negative")
        ceiling = 1.0 - self.error_floor
        if accuracy > ceiling + 1e-12:
            raise EconomicsError(
                "accuracy %.6f is beyond the operational maximum %.6f"
                % (accuracy, ceiling)
            )
        if accuracy == 0.0:
            return 0.0
        if accuracy >= ceiling:  # at the ceiling the full effort is matched
            return 1.0
        return math.log(self.q0 / (1.0 - accuracy)) / math.log(self.q0 / self.error_floor)

    def remaining_error(self, ratio: float) -> float:
        """Error level left after spending the given fraction of a full
        effort (inverse of effort_ratio)."""
        if not (0.0 <= ratio <= 1.0):
            raise EconomicsError("effort ratio must lie in [0, 1]")
        return self.q0 * (self.error_floor / self.q0) ** ratio

    def truncated_ratio(self, accuracy: float) -> Decimal:
        """Effort ratio truncated (not rounded) to three decimals, the
        published precision."""
        return Decimal(math.floor(self.effort_ratio(accuracy) * 1000)) / 1000


@dataclass(frozen=True)
class TaskRecord:
    """One reference task: human-hours benchmark plus measured accuracy."""

    name: str
    group: str
    hours: int
    accuracy: float | None  # None: performed by machine, no human benchmark
    note: str = ""

    def __post_init__(self):
        if self.group not in (CORE_GROUP, EXTENSION_GROUP):
            raise EconomicsError("unknown task group: %r" % (self.group,))
        if self.hours < 0:
            raise EconomicsError("hours must be non-negative")
        if self.accuracy is not None and not (0.0 <= self.accuracy < 1.0):
            raise EconomicsError("accuracy must lie in [0, 1)")

    @property
    def machine(self) -> bool:
        return self.accuracy is None

    @property
    def assumed(self) -> bool:
        return "assumed" in self.note


@dataclass(frozen=True)
class ValuationRow:
    name: str
    group: str
    hours: int
    accuracy: float | None
    ratio: Decimal | None
    valuation: int | None
    note: str = ""


@dataclass
class ValuationTable:
    rows: list[ValuationRow] = field(default_factory=list)

    def _group_rows(self, group: str) -> list[ValuationRow]:
        return [r for r in self.rows if r.group == group]

    def group_hours(self, group: str) -> int:
        return sum(r.hours for r in self._group_rows(group))

    def group_valuation(self, group: str) -> int:
        return sum(r.valuation for r in self._group_rows(group) if r.valuation is not None)

    @property
    def total_hours(self) -> int:
        return sum(r.hours for r in self.rows)

    @property
    def total_valuation(self) -> int:
        return sum(r.valuation for r in self.rows if r.valuation is not None)

    def format_text(self) -> str:
        lines = []
        header = "%-28s %12s %9s %7s %12s" % ("task", "human-hours", "accuracy", "ratio", "equiv-hours")
        lines.append(header)
        lines.append("-" * len(header))
        for group in (CORE_GROUP, EXTENSION_GROUP):
            rows = self._group_rows(group)
            if not rows:
                continue
            for row in rows:
                acc = _format_accuracy(row.accuracy)
                ratio = "%.3f" % row.ratio if row.ratio is not None else "-"
                val = "{:,}".format(row.valuation) if row.valuation is not None else "machine"
                name = row.name + ("*" if "assumed" in row.note else "")
                lines.append(
                    "%-28s %12s %9s %7s %12s"
                    % (name, "{:,}".format(row.hours), acc, ratio, val)
                )
            lines.append(
                "%-28s %12s %9s %7s %12s"
                % (
                    "subtotal (%s)" % group,
                    "{:,}".format(self.group_hours(group)),
                    "",
                    "",
                    "{:,}".format(self.group_valuation(group)),
                )
            )
        lines.append(
            "%-28s %12s %9s %7s %12s"
            % (
                "total",
                "{:,}".format(self.total_hours),
                "",
                "",
                "{:,}".format(self.total_valuation),
            )
        )
        if any("assumed" in r.note for r in self.rows):
            lines.append("* accuracy assumed, not measured")
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = ["task,group,hours,accuracy,ratio,equivalent_hours,note"]
        for row in self.rows:
            out.append(
                "%s,%s,%d,%s,%s,%s,%s"
                % (
                    row.name,
                    row.group,
                    row.hours,
                    "" if row.accuracy is None else repr(row.accuracy),
                    "" if row.ratio is None else "%.3f" % row.ratio,
                    "" if row.valuation is None else row.valuation,
                    row.note,
                )
            )
        return "\n".join(out) + "\n"


def _format_accuracy(accuracy: float | None) -> str:
    if accuracy is None:
        return "-"
    pct = (Decimal(repr(accuracy)) * 100).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return "%s%%" % pct


def valuation_row(record: TaskRecord, model: EffortModel) -> ValuationRow:
    if record.machine:
        return ValuationRow(record.name, record.group, record.hours, None, None, None, record.note)
    ratio = model.truncated_ratio(record.accuracy)
    valuation = int((Decimal(record.hours) * ratio).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return ValuationRow(
        record.name, record.group, record.hours, record.accuracy, ratio, valuation, record.note
    )


def build_valuation_table(records, model: EffortModel | None = None) -> ValuationTable:
    model = model or EffortModel()
    table = ValuationTable()
    for record in records:
        table.rows.append(valuation_row(record, model))
    return table


def load_task_records(path: str | Path | None = None) -> list[TaskRecord]:
    """Load reference tasks from CSV.

    Columns: ``task``, hours as ``hours`` or ``h_tot``, ``accuracy``
    (empty or the word MACHINE marks a machine-only task), and optional
    ``group`` (defaults to core) and ``note``. With no path, loads the
    bundled reference table.
    """
    if path is None:
        source = resources.files("hcorpus").joinpath("data/reference_tasks.csv")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    records = []
    reader = csv.DictReader(text.splitlines())
    fields = set(reader.fieldnames or ())
    hours_col = "hours" if "hours" in fields else "h_tot"
    if "task" not in fields or hours_col not in fields or "accuracy" not in fields:
        raise EconomicsError("task table must have columns: task, hours (or h_tot), accuracy")
    for i, row in enumerate(reader, start=2):
        raw_acc = (row["accuracy"] or "").strip()
        try:
            hours = int(row[hours_col]) if (row[hours_col] or "").strip() else 0
            if not raw_acc or raw_acc.upper() == "MACHINE":
                accuracy = None
            else:
                accuracy = float(raw_acc)
        except ValueError as exc:
            raise EconomicsError("row %d: %s" % (i, exc)) from exc
        records.append(
            TaskRecord(
                name=row["task"].strip(),
                group=(row.get("group") or CORE_GROUP).strip() or CORE_GROUP,
                hours=hours,
                accuracy=accuracy,
                note=(row.get("note") or "").strip(),
            )
        )
    if not records:
        raise EconomicsError("task table is empty")
    return records
