"""Audit metrics, error statistics, and report emission.

Counts and ratios follow the shape of the field study's published tables:
occupancy and copy-class counts per row with a totals row, error splits by
impact and by category, and ratios of error classes to copy classes. Rows are
sheets when metrics come from a live workbook, or whole workbooks when raw
counts are injected directly (the audited books themselves are not available,
so the published numbers are reproduced from their counts, not re-derived).

Display rounding is half-up: 1 decimal for percentages, 2 for the grand-total
error rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .areas import Category, FindingsStore, Impact
from .equivalence import ClassHierarchy, Level
from .grid import Workbook, occupancy_counts


class UsageError(ValueError):
    pass


def round_half_up(value: float, ndigits: int) -> float:
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def _pct(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def _fmt_pct(value: float | None, ndigits: int = 1) -> str:
    if value is None:
        return "-"
    return f"{round_half_up(value, ndigits):.{ndigits}f}%"


@dataclass(frozen=True)
class MetricsRow:
    """Occupancy counts plus the copy-class count for one sheet or workbook."""

    name: str
    cells: int
    occupied: int
    formulas: int
    literals: int
    ce_count: int

    @property
    def occupied_pct(self) -> float | None:
        return _pct(self.occupied, self.cells)

    @property
    def formula_pct(self) -> float | None:
        return _pct(self.formulas, self.occupied)

    @property
    def literal_pct(self) -> float | None:
        return _pct(self.literals, self.occupied)

    @property
    def ce_to_formula(self) -> float | None:
        return _pct(self.ce_count, self.formulas)

    @property
    def avg_class_size(self) -> float | None:
        if self.ce_count == 0:
            return None
        return self.formulas / self.ce_count

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "cells": self.cells,
            "occupied": self.occupied,
            "formulas": self.formulas,
            "literals": self.literals,
            "ce_count": self.ce_count,
            "occupied_pct": self.occupied_pct,
            "formula_pct": self.formula_pct,
            "literal_pct": self.literal_pct,
            "ce_to_formula": self.ce_to_formula,
            "avg_class_size": self.avg_class_size,
            "display": {
                "occupied_pct": _fmt_pct(self.occupied_pct),
                "formula_pct": _fmt_pct(self.formula_pct),
                "literal_pct": _fmt_pct(self.literal_pct),
                "ce_to_formula": _fmt_pct(self.ce_to_formula),
            },
        }


@dataclass
class AuditMetrics:
    row_kind: str  # "sheet" or "workbook"
    rows: list[MetricsRow]
    total: MetricsRow

    def to_json(self) -> dict:
        return {"row_kind": self.row_kind, "rows": [r.to_json() for r in self.rows], "total": self.total.to_json()}

    @classmethod
    def from_counts(cls, rows: list[tuple[str, int, int, int, int, int]], row_kind: str = "workbook") -> "AuditMetrics":
        """Injection mode: build the table from raw published counts."""
        metric_rows = [MetricsRow(*row) for row in rows]
        total = MetricsRow(
            "Total",
            sum(r.cells for r in metric_rows),
            sum(r.occupied for r in metric_rows),
            sum(r.formulas for r in metric_rows),
            sum(r.literals for r in metric_rows),
            sum(r.ce_count for r in metric_rows),
        )
        return cls(row_kind, metric_rows, total)


def compute_metrics(workbook: Workbook, hierarchy: ClassHierarchy) -> AuditMetrics:
    """Per-sheet occupancy and class counts with a workbook totals row.

    A per-sheet ce_count counts the copy classes with at least one member on
    that sheet, so classes spanning sheets appear in each sheet's count; the
    totals row counts each class once.
    """
    copy_classes = hierarchy.classes_at_level(Level.COPY)
    per_sheet_classes: dict[str, set[str]] = {}
    for cls in copy_classes:
        for addr in cls.members:
            per_sheet_classes.setdefault(addr.sheet, set()).add(cls.id)

    rows = []
    for sheet in workbook.sheets:
        counts = occupancy_counts(sheet)
        rows.append(
            MetricsRow(
                sheet.name,
                counts.cells,
                counts.occupied,
                counts.formulas,
                counts.literals,
                len(per_sheet_classes.get(sheet.name, ())),
            )
        )
    total = MetricsRow(
        workbook.name,
        sum(r.cells for r in rows),
        sum(r.occupied for r in rows),
        sum(r.formulas for r in rows),
        sum(r.literals for r in rows),
        len(copy_classes),
    )
    return AuditMetrics("sheet", rows, total)


# ---------------------------------------------------------------------------
# Error statistics
# ---------------------------------------------------------------------------


@dataclass
class ErrorStatisticsRow:
    name: str
    error_classes: int
    errors: int
    impact_classes: dict[Impact, int] = field(default_factory=dict)
    impact_errors: dict[Impact, int] = field(default_factory=dict)
    category_classes: dict[Category, int] = field(default_factory=dict)
    category_errors: dict[Category, int] = field(default_factory=dict)
    formulas: int = 0
    ce_count: int = 0
    occupied: int = 0

    @property
    def error_classes_to_ce(self) -> float | None:
        return _pct(self.error_classes, self.ce_count)

    @property
    def errors_to_formulas(self) -> float | None:
        return _pct(self.errors, self.formulas)

    @property
    def error_rate(self) -> float | None:
        """Errors relative to occupied cells; the study's headline number."""
        return _pct(self.errors, self.occupied)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "error_classes": self.error_classes,
            "errors": self.errors,
            "impact": {
                imp.value: {"classes": self.impact_classes.get(imp, 0), "errors": self.impact_errors.get(imp, 0)}
                for imp in Impact
            },
            "categories": {
                cat.value: {"classes": self.category_classes.get(cat, 0), "errors": self.category_errors.get(cat, 0)}
                for cat in Category
            },
            "error_classes_to_ce": self.error_classes_to_ce,
            "errors_to_formulas": self.errors_to_formulas,
            "error_rate": self.error_rate,
            "display": {
                "error_classes_to_ce": _fmt_pct(self.error_classes_to_ce),
                "errors_to_formulas": _fmt_pct(self.errors_to_formulas),
                "error_rate": _fmt_pct(self.error_rate, 2),
            },
        }


@dataclass
class ErrorStatistics:
    rows: list[ErrorStatisticsRow]
    total: ErrorStatisticsRow

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "total": self.total.to_json()}

    @classmethod
    def from_splits(
        cls,
        impact_rows: list[tuple[str, int, int, int, int]],
        category_rows: list[tuple[Category, int, int]] | None = None,
        counts_by_name: dict[str, tuple[int, int, int]] | None = None,
    ) -> "ErrorStatistics":
        """Injection mode from published splits.

        impact_rows: (name, qualitative classes, qualitative errors,
        quantitative classes, quantitative errors) per workbook.
        category_rows: (category, classes, errors) study-wide.
        counts_by_name: name -> (formulas, ce_count, occupied) for ratios.
        """
        counts_by_name = counts_by_name or {}
        rows = []
        for name, qual_c, qual_e, quant_c, quant_e in impact_rows:
            formulas, ce, occupied = counts_by_name.get(name, (0, 0, 0))
            rows.append(
                ErrorStatisticsRow(
                    name,
                    error_classes=qual_c + quant_c,
                    errors=qual_e + quant_e,
                    impact_classes={Impact.QUALITATIVE: qual_c, Impact.QUANTITATIVE: quant_c},
                    impact_errors={Impact.QUALITATIVE: qual_e, Impact.QUANTITATIVE: quant_e},
                    formulas=formulas,
                    ce_count=ce,
                    occupied=occupied,
                )
            )
        total_formulas, total_ce, total_occupied = counts_by_name.get("Total", (0, 0, 0))
        if not counts_by_name.get("Total"):
            total_formulas = sum(r.formulas for r in rows)
            total_ce = sum(r.ce_count for r in rows)
            total_occupied = sum(r.occupied for r in rows)
        total = ErrorStatisticsRow(
            "Total",
            error_classes=sum(r.error_classes for r in rows),
            errors=sum(r.errors for r in rows),
            impact_classes={imp: sum(r.impact_classes.get(imp, 0) for r in rows) for imp in Impact},
            impact_errors={imp: sum(r.impact_errors.get(imp, 0) for r in rows) for imp in Impact},
            formulas=total_formulas,
            ce_count=total_ce,
            occupied=total_occupied,
        )
        if category_rows:
            total.category_classes = {cat: c for cat, c, _ in category_rows}
            total.category_errors = {cat: e for cat, _, e in category_rows}
        return cls(rows, total)


def compute_error_statistics(
    store: FindingsStore, hierarchy: ClassHierarchy, workbook: Workbook
) -> ErrorStatistics:
    """Statistics over the confirmed error records of one audited workbook.

    Errors count confirmed records; error classes count distinct error-class
    keys, so copy-equivalent confirmed formulas collapse to one class.
    """
    records = store.records
    by_key: dict[str, list] = {}
    for record in records:
        by_key.setdefault(record.error_class_key, []).append(record)

    impact_classes: dict[Impact, int] = {imp: 0 for imp in Impact}
    impact_errors: dict[Impact, int] = {imp: 0 for imp in Impact}
    category_classes: dict[Category, int] = {cat: 0 for cat in Category}
    category_errors: dict[Category, int] = {cat: 0 for cat in Category}

    for key, group in by_key.items():
        # A class inherits the impact/category of its first confirmed record.
        first = group[0]
        impact_classes[first.impact] += 1
        first_category = store.findings[first.finding_id].category
        category_classes[first_category] += 1
    for record in records:
        impact_errors[record.impact] += 1
        category_errors[store.findings[record.finding_id].category] += 1

    occupied = sum(occupancy_counts(s).occupied for s in workbook.sheets)
    formulas = sum(occupancy_counts(s).formulas for s in workbook.sheets)
    row = ErrorStatisticsRow(
        workbook.name,
        error_classes=len(by_key),
        errors=len(records),
        impact_classes=impact_classes,
        impact_errors=impact_errors,
        category_classes=category_classes,
        category_errors=category_errors,
        formulas=formulas,
        ce_count=len(hierarchy.classes_at_level(Level.COPY)),
        occupied=occupied,
    )
    return ErrorStatistics([row], row)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_CATEGORY_TITLES = {
    Category.CONSTANT_INSTEAD_OF_FORMULA: "Constant instead of formula",
    Category.CONSTANT_INSTEAD_OF_REFERENCE: "Constant instead of reference",
    Category.REFERENCE_TO_EMPTY_CELL: "Reference to empty cell",
    Category.FORMULA_COPIED_TOO_FAR: "Formula copied too far",
    Category.OTHER: "Other",
}


def _table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return lines


def _n(value: int) -> str:
    return f"{value:,}"


def _text_report(metrics: AuditMetrics, stats: ErrorStatistics | None, findings: list) -> str:
    out: list[str] = []
    label = "Sheet" if metrics.row_kind == "sheet" else "Workbook"

    out.append("== Occupancy ==")
    rows = [
        [r.name, _n(r.cells), _n(r.occupied), _n(r.formulas), _n(r.literals), _n(r.ce_count)]
        for r in metrics.rows + [metrics.total]
    ]
    out += _table([label, "#Cells", "#Occupied", "#Formula", "#Literals", "#CE"], rows)
    out.append("")

    out.append("== Occupancy ratios ==")
    rows = [
        [
            r.name,
            _n(r.cells),
            _fmt_pct(r.occupied_pct),
            _fmt_pct(r.formula_pct),
            _fmt_pct(r.literal_pct),
            _fmt_pct(r.ce_to_formula),
            "-" if r.avg_class_size is None else f"{round_half_up(r.avg_class_size, 1):.1f}",
        ]
        for r in metrics.rows + [metrics.total]
    ]
    out += _table([label, "#Cells", "%Occupied", "%Formula", "%Literals", "CE/Formula", "Avg class size"], rows)
    out.append("")

    if stats is not None:
        out.append("== Errors by impact ==")
        rows = []
        for r in stats.rows + ([stats.total] if stats.total is not stats.rows[-1] else []):
            for imp in Impact:
                rows.append(
                    [r.name, imp.value, _n(r.impact_classes.get(imp, 0)), _n(r.impact_errors.get(imp, 0))]
                )
        out += _table(["Name", "Impact", "Error classes", "Errors"], rows)
        out.append("")

        out.append("== Errors by category ==")
        rows = [
            [
                _CATEGORY_TITLES[cat],
                _n(stats.total.category_classes.get(cat, 0)),
                _n(stats.total.category_errors.get(cat, 0)),
            ]
            for cat in Category
        ]
        out += _table(["Category", "Error classes", "Errors"], rows)
        out.append("")

        out.append("== Error-class ratios ==")
        rows = [
            [
                r.name,
                _n(r.formulas),
                _n(r.ce_count),
                _n(r.error_classes),
                _fmt_pct(_pct(r.ce_count, r.formulas)),
                _fmt_pct(r.error_classes_to_ce),
                _fmt_pct(r.errors_to_formulas, 2),
            ]
            for r in stats.rows + ([stats.total] if stats.total is not stats.rows[-1] else [])
        ]
        out += _table(["Name", "#Formula", "#CE", "#ErrorClasses", "CE/Formula", "ErrCls/CE", "Errors/Formula"], rows)
        out.append("")

        rate = stats.total.error_rate
        out.append(
            f"Overall error rate: {_n(stats.total.errors)} errors / {_n(stats.total.occupied)} occupied cells"
            + (f" = {_fmt_pct(rate, 2)}" if rate is not None else "")
        )
        out.append("")

    out.append(f"== Findings ({len(findings)}) ==")
    for finding in findings:
        out.append(f"[{finding.id}] {finding.category.value} {finding.location.qualified}: {finding.description}")
    out.append("")
    return "\n".join(out)


def emit_report(
    metrics: AuditMetrics,
    stats: ErrorStatistics | None,
    findings: list,
    format: str = "text",
    workbook_name: str | None = None,
) -> str:
    """Render the audit report; deterministic for identical inputs."""
    if format == "text":
        return _text_report(metrics, stats, findings)
    if format == "json":
        doc = {
            "workbook": workbook_name or metrics.total.name,
            "sheets": [r.name for r in metrics.rows] if metrics.row_kind == "sheet" else [],
            "metrics": metrics.to_json(),
            "error_statistics": stats.to_json() if stats is not None else None,
            "findings": [f.to_json() for f in findings],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise UsageError(f"unknown report format {format!r} (expected 'json' or 'text')")
