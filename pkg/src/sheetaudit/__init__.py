"""Spreadsheet auditing engine.

Partitions formula cells into copy/logical/structural equivalence classes,
projects them onto sheet geometry, flags irregularities as findings, builds
data-flow graphs, and computes audit metrics and error statistics.
"""

from .areas import (
    Category,
    DetectorConfig,
    ErrorRecord,
    Finding,
    FindingsStore,
    Impact,
    LogicalArea,
    Status,
    collect_findings,
    detect_copied_too_far,
    detect_empty_references,
    detect_interruptions,
    logical_areas,
)
from .equivalence import (
    ClassHierarchy,
    EquivalenceClass,
    Fingerprint,
    Level,
    classes_at_level,
    copy_fingerprint,
    logical_fingerprint,
    partition,
    structural_fingerprint,
)
from .formula import ParseError, RenderError, TranslationError, parse, referenced_cells, render, translate_a1
from .graph import AreaGraph, CellGraph, CoverageError, aggregate, cell_graph, export_dot
from .grid import (
    CellAddress,
    CellContent,
    ContentKind,
    LoadError,
    Sheet,
    Workbook,
    classify_content,
    load_csv_sheets,
    load_fgj,
    load_fgj_text,
    load_workbook,
    occupancy_counts,
)
from .report import AuditMetrics, ErrorStatistics, compute_error_statistics, compute_metrics, emit_report

__all__ = [
    "AreaGraph",
    "AuditMetrics",
    "Category",
    "CellAddress",
    "CellContent",
    "CellGraph",
    "ClassHierarchy",
    "ContentKind",
    "CoverageError",
    "DetectorConfig",
    "EquivalenceClass",
    "ErrorRecord",
    "ErrorStatistics",
    "Finding",
    "FindingsStore",
    "Fingerprint",
    "Impact",
    "Level",
    "LoadError",
    "LogicalArea",
    "ParseError",
    "RenderError",
    "Sheet",
    "Status",
    "TranslationError",
    "Workbook",
    "aggregate",
    "cell_graph",
    "classes_at_level",
    "classify_content",
    "collect_findings",
    "compute_error_statistics",
    "compute_metrics",
    "copy_fingerprint",
    "detect_copied_too_far",
    "detect_empty_references",
    "detect_interruptions",
    "emit_report",
    "export_dot",
    "load_csv_sheets",
    "load_fgj",
    "load_fgj_text",
    "load_workbook",
    "logical_areas",
    "logical_fingerprint",
    "occupancy_counts",
    "parse",
    "partition",
    "referenced_cells",
    "render",
    "structural_fingerprint",
    "translate_a1",
]
