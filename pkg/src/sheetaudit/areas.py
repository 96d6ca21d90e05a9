"""Logical areas, irregularity detectors, and the finding/verdict workflow.

Detectors only produce candidates: a Finding stays Open until an auditor
confirms it (creating an ErrorRecord) or dismisses it. Confirmed errors that
are copy-equivalent coalesce into one error class via their fingerprint key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .equivalence import ClassHierarchy, Level
from .formula import empty_precedents
from .grid import CellAddress, ContentKind, Sheet, Workbook


class Category(Enum):
    CONSTANT_INSTEAD_OF_FORMULA = "constant_instead_of_formula"
    CONSTANT_INSTEAD_OF_REFERENCE = "constant_instead_of_reference"
    REFERENCE_TO_EMPTY_CELL = "reference_to_empty_cell"
    FORMULA_COPIED_TOO_FAR = "formula_copied_too_far"
    OTHER = "other"


# Precedence when row and column scans disagree about one cell: most specific wins.
_INTERRUPTION_RANK = {
    Category.CONSTANT_INSTEAD_OF_FORMULA: 0,
    Category.CONSTANT_INSTEAD_OF_REFERENCE: 1,
    Category.OTHER: 2,
}

_CATEGORY_RANK = {
    Category.CONSTANT_INSTEAD_OF_FORMULA: 0,
    Category.CONSTANT_INSTEAD_OF_REFERENCE: 1,
    Category.REFERENCE_TO_EMPTY_CELL: 2,
    Category.FORMULA_COPIED_TOO_FAR: 3,
    Category.OTHER: 4,
}


class Status(Enum):
    OPEN = "open"
    CONFIRMED_ERROR = "confirmed_error"
    DISMISSED = "dismissed"


class Impact(Enum):
    QUALITATIVE = "qualitative"
    QUANTITATIVE = "quantitative"


@dataclass
class Finding:
    """One candidate irregularity awaiting an auditor verdict."""

    category: Category
    location: CellAddress
    context: dict
    description: str
    id: str | None = None
    status: Status = Status.OPEN

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "location": self.location.qualified,
            "context": self.context,
            "description": self.description,
            "status": self.status.value,
        }


@dataclass(frozen=True)
class ErrorRecord:
    finding_id: str
    impact: Impact
    note: str
    error_class_key: str

    def to_json(self) -> dict:
        return {
            "finding_id": self.finding_id,
            "impact": self.impact.value,
            "note": self.note,
            "error_class_key": self.error_class_key,
        }


class VerdictError(Exception):
    """Verdict applied to a finding that is not Open, or otherwise invalid."""


class FindingNotFound(KeyError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    min_flank: int = 2  # same-class cells required on each side of a gap
    max_gap: int = 1  # longest occupied interruption considered a gap

    def __post_init__(self) -> None:
        if self.min_flank < 1 or self.max_gap < 1:
            raise ValueError("detector thresholds must be >= 1")


# Run-based detectors stay quiet below this many formula cells per sheet;
# flanked runs cannot exist there and tiny sheets only produce noise.
MIN_FORMULA_CELLS_FOR_RUNS = 4


# ---------------------------------------------------------------------------
# Logical areas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogicalArea:
    class_id: str
    sheet: str
    # Rectangles (min_row, min_col, max_row, max_col), disjoint, union = members.
    regions: tuple[tuple[int, int, int, int], ...]


def _rectangle_decompose(points: set[tuple[int, int]]) -> list[tuple[int, int, int, int]]:
    """Greedy row-major maximal rectangles: grow right, then down full-width."""
    covered: set[tuple[int, int]] = set()
    rects = []
    for row, col in sorted(points):
        if (row, col) in covered:
            continue
        width = 1
        while (row, col + width) in points and (row, col + width) not in covered:
            width += 1
        height = 1
        while all(
            (row + height, c) in points and (row + height, c) not in covered
            for c in range(col, col + width)
        ):
            height += 1
        for r in range(row, row + height):
            for c in range(col, col + width):
                covered.add((r, c))
        rects.append((row, col, row + height - 1, col + width - 1))
    return rects


def logical_areas(hierarchy: ClassHierarchy, level: Level) -> list[LogicalArea]:
    """Per class and sheet, the maximal-rectangle footprint of the member set."""
    areas = []
    for cls in hierarchy.classes_at_level(level):
        by_sheet: dict[str, set[tuple[int, int]]] = {}
        sheet_order: list[str] = []
        for addr in cls.members:
            if addr.sheet not in by_sheet:
                by_sheet[addr.sheet] = set()
                sheet_order.append(addr.sheet)
            by_sheet[addr.sheet].add((addr.row, addr.col))
        for sheet_name in sheet_order:
            rects = _rectangle_decompose(by_sheet[sheet_name])
            areas.append(LogicalArea(cls.id, sheet_name, tuple(rects)))
    return areas


# ---------------------------------------------------------------------------
# Run scanning shared by the interruption and copied-too-far detectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Run:
    sheet: str
    orientation: str  # "row" or "col"
    line: int  # the fixed coordinate
    start: int  # varying coordinate of the first member
    cells: tuple[CellAddress, ...]
    class_id: str

    @property
    def end(self) -> int:
        return self.start + len(self.cells) - 1


def _runs_on_sheet(sheet: Sheet, copy_class_of: dict[CellAddress, str]) -> Iterator[_Run]:
    """Maximal same-class runs of consecutive cells along every row and column."""
    by_row: dict[int, list[tuple[int, CellAddress]]] = {}
    by_col: dict[int, list[tuple[int, CellAddress]]] = {}
    for row, col, content in sheet.cells():
        addr = CellAddress(sheet.name, col, row)
        if addr in copy_class_of:
            by_row.setdefault(row, []).append((col, addr))
            by_col.setdefault(col, []).append((row, addr))

    for orientation, lines in (("row", by_row), ("col", by_col)):
        for line in sorted(lines):
            entries = sorted(lines[line])
            run_cells: list[CellAddress] = []
            run_start = 0
            run_class = ""
            prev_coord = None
            for coord, addr in entries:
                cid = copy_class_of[addr]
                if run_cells and cid == run_class and coord == prev_coord + 1:
                    run_cells.append(addr)
                else:
                    if run_cells:
                        yield _Run(sheet.name, orientation, line, run_start, tuple(run_cells), run_class)
                    run_cells = [addr]
                    run_start = coord
                    run_class = cid
                prev_coord = coord
            if run_cells:
                yield _Run(sheet.name, orientation, line, run_start, tuple(run_cells), run_class)


def _addr_on_line(sheet: str, orientation: str, line: int, coord: int) -> CellAddress:
    if orientation == "row":
        return CellAddress(sheet, coord, line)
    return CellAddress(sheet, line, coord)


def _line_name(orientation: str, line: int) -> str:
    from .grid import column_letters

    return f"row {line}" if orientation == "row" else f"column {column_letters(line)}"


# ---------------------------------------------------------------------------
# Detectors
# ---------------------------------------------------------------------------


def detect_interruptions(
    hierarchy: ClassHierarchy, workbook: Workbook, config: DetectorConfig = DetectorConfig()
) -> list[Finding]:
    """Occupied cells that break an otherwise regular run of one copy class.

    A gap of at most `max_gap` occupied cells between two runs of the same
    class, each at least `min_flank` long, yields one finding per gap cell.
    """
    best: dict[CellAddress, Finding] = {}
    for sheet in workbook.sheets:
        formula_count = sum(1 for _, _, c in sheet.cells() if c.is_formula)
        if formula_count < MIN_FORMULA_CELLS_FOR_RUNS:
            continue
        runs_by_class_line: dict[tuple[str, str, int], list[_Run]] = {}
        for run in _runs_on_sheet(sheet, hierarchy.member_copy_class):
            runs_by_class_line.setdefault((run.class_id, run.orientation, run.line), []).append(run)

        for (class_id, orientation, line), runs in sorted(runs_by_class_line.items()):
            runs.sort(key=lambda r: r.start)
            for left, right in zip(runs, runs[1:]):
                gap = range(left.end + 1, right.start)
                if not gap or len(gap) > config.max_gap:
                    continue
                if len(left.cells) < config.min_flank or len(right.cells) < config.min_flank:
                    continue
                gap_addrs = [_addr_on_line(sheet.name, orientation, line, coord) for coord in gap]
                contents = [workbook.content_at(a) for a in gap_addrs]
                if any(c.kind is ContentKind.EMPTY for c in contents):
                    continue  # a hole, not an interruption
                for addr, content in zip(gap_addrs, contents):
                    finding = _classify_interruption(hierarchy, workbook, addr, content, class_id, orientation, line, left, right)
                    prior = best.get(addr)
                    if prior is None or _INTERRUPTION_RANK[finding.category] < _INTERRUPTION_RANK[prior.category]:
                        best[addr] = finding
    return sorted(best.values(), key=lambda f: (workbook.address_key(f.location), _INTERRUPTION_RANK[f.category]))


def _classify_interruption(
    hierarchy: ClassHierarchy,
    workbook: Workbook,
    addr: CellAddress,
    content,
    class_id: str,
    orientation: str,
    line: int,
    left: _Run,
    right: _Run,
) -> Finding:
    run_text = f"{left.cells[0].a1}:{right.cells[-1].a1}"
    context = {"classes": [class_id], "run": f"{addr.sheet}!{run_text}", "line": _line_name(orientation, line)}
    where = f"{addr.qualified} interrupts the {_line_name(orientation, line)} run {run_text} of class {class_id}"
    if content.is_constant:
        return Finding(
            Category.CONSTANT_INSTEAD_OF_FORMULA,
            addr,
            context,
            f"{where}: holds the constant {content.raw!r} where the surrounding cells hold formulas.",
        )
    rep = hierarchy.by_id[class_id].representative
    _, run_logical, run_structural = hierarchy.ancestry(rep)
    _, cell_logical, cell_structural = hierarchy.ancestry(addr)
    if cell_structural == run_structural and cell_logical != run_logical:
        context["classes"] = [class_id, hierarchy.member_copy_class[addr]]
        return Finding(
            Category.CONSTANT_INSTEAD_OF_REFERENCE,
            addr,
            context,
            f"{where}: same formula shape but a different logical class "
            "(heuristic: a constant likely replaced a reference).",
        )
    context["classes"] = [class_id, hierarchy.member_copy_class[addr]]
    return Finding(
        Category.OTHER,
        addr,
        context,
        f"{where}: holds an unrelated formula.",
    )


def detect_empty_references(workbook: Workbook) -> list[Finding]:
    """Formula cells with at least one empty, out-of-grid, or unknown-sheet precedent."""
    findings = []
    for addr, content in workbook.formula_cells():
        offenders = empty_precedents(content.ast, addr, workbook)
        if not offenders:
            continue
        parts = []
        for p in offenders[:5]:
            if not p.sheet_known:
                parts.append(f"{p.sheet}!? (unknown sheet)")
            elif not p.in_grid:
                parts.append(f"out-of-grid ({p.sheet}: row {p.row}, col {p.col})")
            else:
                parts.append(p.address.qualified)
        more = f" and {len(offenders) - 5} more" if len(offenders) > 5 else ""
        findings.append(
            Finding(
                Category.REFERENCE_TO_EMPTY_CELL,
                addr,
                {"precedents": parts, "count": len(offenders)},
                f"{addr.qualified} references {len(offenders)} empty or unresolvable "
                f"cell(s): {', '.join(parts)}{more}.",
            )
        )
    return sorted(findings, key=lambda f: workbook.address_key(f.location))


def detect_copied_too_far(hierarchy: ClassHierarchy, workbook: Workbook) -> list[Finding]:
    """Trailing run members whose shifted references all point at nothing.

    A member is dead when it has relative references and every one of them
    resolves to empty (or out-of-grid) cells; the maximal dead segment at
    either end of a run is flagged when the interior still resolves data.
    """

    def member_state(addr: CellAddress) -> str:
        content = workbook.content_at(addr)
        rel = _relative_precedent_cells(content.ast, addr, workbook)
        if not rel:
            return "neutral"  # no relative references: never flagged
        occupied = 0
        for p in rel:
            if p.in_grid and p.sheet_known and workbook.content_at(p.address).kind is not ContentKind.EMPTY:
                occupied += 1
        if occupied == 0:
            return "dead"
        return "alive"

    best: dict[CellAddress, Finding] = {}
    for sheet in workbook.sheets:
        formula_count = sum(1 for _, _, c in sheet.cells() if c.is_formula)
        if formula_count < MIN_FORMULA_CELLS_FOR_RUNS:
            continue
        for run in _runs_on_sheet(sheet, hierarchy.member_copy_class):
            if len(run.cells) < 2:
                continue
            states = [member_state(a) for a in run.cells]
            lead = 0
            while lead < len(states) and states[lead] == "dead":
                lead += 1
            trail = 0
            while trail < len(states) - lead and states[-1 - trail] == "dead":
                trail += 1
            if lead + trail == 0 or lead + trail >= len(states):
                continue  # nothing trailing, or the whole run is dead
            interior = states[lead : len(states) - trail]
            if "alive" not in interior:
                continue
            flagged = list(run.cells[:lead]) + list(run.cells[len(run.cells) - trail :])
            run_text = f"{run.cells[0].a1}:{run.cells[-1].a1}"
            for addr in flagged:
                finding = Finding(
                    Category.FORMULA_COPIED_TOO_FAR,
                    addr,
                    {"classes": [run.class_id], "run": f"{run.sheet}!{run_text}", "line": _line_name(run.orientation, run.line)},
                    f"{addr.qualified} ends the {_line_name(run.orientation, run.line)} run {run_text} "
                    f"of class {run.class_id} but all its shifted references resolve to empty cells; "
                    "the formula was probably copied past the data.",
                )
                best.setdefault(addr, finding)
    return sorted(best.values(), key=lambda f: workbook.address_key(f.location))


def _relative_precedent_cells(ast, origin: CellAddress, workbook: Workbook):
    """Precedents produced by references that have at least one relative axis."""
    from .formula import Binary, CellRef, FunctionCall, Precedent, Range, Unary
    from .grid import MAX_COL, MAX_ROW

    found = []

    def resolve(ref):
        sheet = ref.sheet if ref.sheet is not None else origin.sheet
        col = ref.col.resolve(origin.col)
        row = ref.row.resolve(origin.row)
        in_grid = 1 <= col <= MAX_COL and 1 <= row <= MAX_ROW
        return sheet, row, col, in_grid

    def visit(node):
        if isinstance(node, CellRef):
            if not (node.ref.col.absolute and node.ref.row.absolute):
                sheet, row, col, in_grid = resolve(node.ref)
                found.append(Precedent(sheet, row, col, in_grid, workbook.has_sheet(sheet)))
        elif isinstance(node, Range):
            start, end = node.rng.start, node.rng.end
            fully_absolute = all(a.absolute for a in (start.col, start.row, end.col, end.row))
            if not fully_absolute:
                sheet, row1, col1, _ = resolve(start)
                _, row2, col2, _ = resolve(end)
                known = workbook.has_sheet(sheet)
                for row in range(min(row1, row2), max(row1, row2) + 1):
                    for col in range(min(col1, col2), max(col1, col2) + 1):
                        in_grid = 1 <= col <= MAX_COL and 1 <= row <= MAX_ROW
                        found.append(Precedent(sheet, row, col, in_grid, known))
        elif isinstance(node, Unary):
            visit(node.child)
        elif isinstance(node, Binary):
            visit(node.left)
            visit(node.right)
        elif isinstance(node, FunctionCall):
            for arg in node.args:
                visit(arg)

    visit(ast)
    return found


def collect_findings(
    workbook: Workbook, hierarchy: ClassHierarchy, config: DetectorConfig = DetectorConfig()
) -> list[Finding]:
    """Run every detector and assign finding ids in canonical order."""
    findings = (
        detect_interruptions(hierarchy, workbook, config)
        + detect_empty_references(workbook)
        + detect_copied_too_far(hierarchy, workbook)
    )
    findings.sort(key=lambda f: (workbook.address_key(f.location), _CATEGORY_RANK[f.category]))
    for i, finding in enumerate(findings, start=1):
        finding.id = f"f{i}"
    return findings


# ---------------------------------------------------------------------------
# Findings store / error database
# ---------------------------------------------------------------------------


def default_error_class_key(workbook: Workbook, hierarchy: ClassHierarchy) -> Callable[[CellAddress], str]:
    """Copy fingerprint for formula cells, a location-derived key otherwise."""

    def key_for(addr: CellAddress) -> str:
        cid = hierarchy.member_copy_class.get(addr)
        if cid is not None:
            return hierarchy.by_id[cid].fingerprint.key
        return f"loc:{addr.qualified}"

    return key_for


class FindingsStore:
    """Single-writer store of findings and confirmed error records.

    Every mutation appends one JSON line to the log (when a path is given);
    replaying the log reconstructs the same store state byte-for-byte. The
    timestamp lives in the envelope so payloads stay deterministic.
    """

    def __init__(self, error_class_key: Callable[[CellAddress], str], log_path: Path | str | None = None):
        self._key_for = error_class_key
        self._log_path = Path(log_path) if log_path is not None else None
        self.findings: dict[str, Finding] = {}
        self.records: list[ErrorRecord] = []

    def _append_log(self, record: dict) -> None:
        if self._log_path is None:
            return
        envelope = {"ts": datetime.now(timezone.utc).isoformat(), "record": record}
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(envelope, sort_keys=False) + "\n")

    def add_findings(self, findings: Iterable[Finding]) -> None:
        for finding in findings:
            if finding.id is None:
                raise ValueError("findings must have ids before entering the store")
            self.findings[finding.id] = finding
            self._append_log({"type": "finding", "finding": finding.to_json()})

    def record_verdict(
        self, finding_id: str, action: str, impact: Impact | str | None = None, note: str = ""
    ) -> Finding:
        finding = self.findings.get(finding_id)
        if finding is None:
            raise FindingNotFound(finding_id)
        if finding.status is not Status.OPEN:
            raise VerdictError(f"finding {finding_id} is {finding.status.value}, not open")
        if action == "confirm":
            if impact is None:
                raise VerdictError("confirm requires an impact (qualitative or quantitative)")
            impact = Impact(impact) if isinstance(impact, str) else impact
            finding.status = Status.CONFIRMED_ERROR
            record = ErrorRecord(finding_id, impact, note, self._key_for(finding.location))
            self.records.append(record)
            self._append_log({"type": "verdict", "finding_id": finding_id, "action": "confirm", "error_record": record.to_json()})
        elif action == "dismiss":
            finding.status = Status.DISMISSED
            self._append_log({"type": "verdict", "finding_id": finding_id, "action": "dismiss", "note": note})
        else:
            raise VerdictError(f"unknown verdict action {action!r}")
        return finding

    def snapshot(self) -> str:
        """Canonical serialization of the store state."""
        doc = {
            "findings": [self.findings[k].to_json() for k in sorted(self.findings, key=_finding_id_key)],
            "error_records": [r.to_json() for r in self.records],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def replay(cls, log_path: Path | str, error_class_key: Callable[[CellAddress], str]) -> "FindingsStore":
        """Rebuild a store from its log without writing a new one."""
        store = cls(error_class_key, log_path=None)
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)["record"]
                if record["type"] == "finding":
                    f = record["finding"]
                    finding = Finding(
                        Category(f["category"]),
                        CellAddress.parse(f["location"]),
                        f["context"],
                        f["description"],
                        id=f["id"],
                        status=Status(f["status"]),
                    )
                    store.findings[finding.id] = finding
                elif record["type"] == "verdict":
                    finding = store.findings[record["finding_id"]]
                    if record["action"] == "confirm":
                        finding.status = Status.CONFIRMED_ERROR
                        er = record["error_record"]
                        store.records.append(
                            ErrorRecord(er["finding_id"], Impact(er["impact"]), er["note"], er["error_class_key"])
                        )
                    else:
                        finding.status = Status.DISMISSED
        return store


def _finding_id_key(fid: str) -> tuple:
    return (len(fid), fid)
