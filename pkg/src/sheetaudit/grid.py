"""Workbook grid model: cell addresses, content classification, loading, occupancy.

Workbooks are loaded from Formula-Grid JSON (FGJ) or from a set of CSV files
(one per sheet) and are immutable afterwards, so they can be shared freely
across analysis passes.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, NamedTuple, Sequence

MAX_COL = 18_278  # column "ZZZ"
MAX_ROW = 1_048_576


class LoadError(Exception):
    """A workbook document could not be loaded.

    Carries the sheet name and cell address closest to the problem, when known.
    """

    def __init__(self, message: str, sheet: str | None = None, addr: str | None = None):
        self.sheet = sheet
        self.addr = addr
        where = ""
        if sheet is not None and addr is not None:
            where = f" at {sheet}!{addr}"
        elif sheet is not None:
            where = f" in sheet {sheet!r}"
        super().__init__(message + where)


def column_letters(index: int) -> str:
    """1-based column index to bijective base-26 letters (1=A, 26=Z, 27=AA)."""
    if index < 1:
        raise ValueError(f"column index must be >= 1, got {index}")
    out = []
    n = index
    while n:
        n, rem = divmod(n - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def column_index(letters: str) -> int:
    """Column letters to 1-based index; inverse of column_letters."""
    if not letters or not letters.isalpha():
        raise ValueError(f"invalid column letters: {letters!r}")
    n = 0
    for ch in letters.upper():
        n = n * 26 + (ord(ch) - ord("A") + 1)
    return n


_A1_RE = re.compile(r"^(?:([^!]+)!)?([A-Za-z]+)([0-9]+)$")


@dataclass(frozen=True)
class CellAddress:
    """A 1-based (sheet, column, row) cell coordinate."""

    sheet: str
    col: int
    row: int

    def __post_init__(self) -> None:
        if not self.sheet:
            raise ValueError("sheet name must be non-empty")
        if self.col < 1 or self.row < 1:
            raise ValueError(f"column and row must be >= 1, got ({self.col}, {self.row})")

    @property
    def a1(self) -> str:
        """A1 text without the sheet qualifier, e.g. 'B3'."""
        return f"{column_letters(self.col)}{self.row}"

    @property
    def qualified(self) -> str:
        """Sheet-qualified A1 text, e.g. 'Sheet1!B3'."""
        return f"{self.sheet}!{self.a1}"

    @classmethod
    def parse(cls, text: str, sheet: str | None = None) -> "CellAddress":
        """Parse 'B3' or 'Sheet1!B3'; `sheet` supplies the default qualifier."""
        m = _A1_RE.match(text.strip())
        if not m:
            raise ValueError(f"invalid A1 address: {text!r}")
        sheet_part, letters, digits = m.groups()
        name = sheet_part if sheet_part is not None else sheet
        if name is None:
            raise ValueError(f"address {text!r} has no sheet qualifier and no default sheet")
        return cls(name, column_index(letters), int(digits))

    def __str__(self) -> str:
        return self.qualified


class ContentKind(Enum):
    FORMULA = "formula"
    NUMBER = "number"
    TEXT = "text"
    BOOLEAN = "boolean"
    EMPTY = "empty"


# Strict decimal syntax: '.' separator only, optional exponent; no locale forms.
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class CellContent:
    """Classified content of one cell.

    `ast` is present iff kind is FORMULA; `value` carries the payload of
    constant kinds (float, str, or bool).
    """

    kind: ContentKind
    raw: str
    ast: Any = None
    value: Any = None

    @property
    def is_formula(self) -> bool:
        return self.kind is ContentKind.FORMULA

    @property
    def is_constant(self) -> bool:
        return self.kind in (ContentKind.NUMBER, ContentKind.TEXT, ContentKind.BOOLEAN)


EMPTY_CELL = CellContent(ContentKind.EMPTY, "")


def classify_content(raw: str) -> ContentKind:
    """Classify trimmed cell source text. Total: every string gets a kind."""
    if raw == "":
        return ContentKind.EMPTY
    if raw.startswith("="):
        return ContentKind.FORMULA
    if _NUMBER_RE.match(raw):
        return ContentKind.NUMBER
    if raw.upper() in ("TRUE", "FALSE"):
        return ContentKind.BOOLEAN
    return ContentKind.TEXT


class Sheet:
    """A sparse, immutable grid of non-empty cells keyed by (row, col)."""

    def __init__(self, name: str, cells: dict[tuple[int, int], CellContent]):
        if not name:
            raise ValueError("sheet name must be non-empty")
        self.name = name
        # Row-major storage order makes iteration deterministic regardless of
        # the order cells appeared in the source document.
        self._cells = dict(sorted(cells.items()))
        for (row, col), content in self._cells.items():
            if content.kind is ContentKind.EMPTY:
                raise ValueError(f"sheet {name!r} stores an empty cell at ({row}, {col})")
            if row < 1 or col < 1:
                raise ValueError(f"cell coordinate out of grid: ({row}, {col})")
        if self._cells:
            rows = [r for r, _ in self._cells]
            cols = [c for _, c in self._cells]
            self.box: tuple[int, int, int, int] | None = (min(rows), min(cols), max(rows), max(cols))
        else:
            self.box = None

    def cell(self, row: int, col: int) -> CellContent:
        return self._cells.get((row, col), EMPTY_CELL)

    def cells(self) -> Iterator[tuple[int, int, CellContent]]:
        """Occupied cells in row-major order."""
        for (row, col), content in self._cells.items():
            yield row, col, content

    @property
    def occupied(self) -> int:
        return len(self._cells)


class OccupancyCounts(NamedTuple):
    cells: int
    occupied: int
    formulas: int
    literals: int


def occupancy_counts(sheet: Sheet) -> OccupancyCounts:
    """Bounding-box cell count, occupied cells, formulas, and literals.

    Literals lump numeric, boolean, and text constants together; the finer
    distinction stays available on each CellContent.
    """
    if sheet.box is None:
        return OccupancyCounts(0, 0, 0, 0)
    min_row, min_col, max_row, max_col = sheet.box
    box_cells = (max_row - min_row + 1) * (max_col - min_col + 1)
    formulas = sum(1 for _, _, c in sheet.cells() if c.is_formula)
    occupied = sheet.occupied
    return OccupancyCounts(box_cells, occupied, formulas, occupied - formulas)


class Workbook:
    """An ordered collection of uniquely named sheets."""

    def __init__(self, name: str, sheets: Sequence[Sheet]):
        self.name = name
        self.sheets = list(sheets)
        self.sheet_index: dict[str, int] = {}
        for i, sheet in enumerate(self.sheets):
            if sheet.name in self.sheet_index:
                raise LoadError(f"duplicate sheet name {sheet.name!r}", sheet=sheet.name)
            self.sheet_index[sheet.name] = i

    def sheet(self, name: str) -> Sheet | None:
        i = self.sheet_index.get(name)
        return self.sheets[i] if i is not None else None

    def has_sheet(self, name: str) -> bool:
        return name in self.sheet_index

    def content_at(self, addr: CellAddress) -> CellContent:
        sheet = self.sheet(addr.sheet)
        if sheet is None:
            raise KeyError(f"unknown sheet {addr.sheet!r}")
        return sheet.cell(addr.row, addr.col)

    def address_key(self, addr: CellAddress) -> tuple[int, int, int]:
        """Canonical sort key: sheet order in the workbook, then row, then column."""
        return (self.sheet_index.get(addr.sheet, len(self.sheets)), addr.row, addr.col)

    def formula_cells(self) -> Iterator[tuple[CellAddress, CellContent]]:
        """All formula cells in canonical order."""
        for sheet in self.sheets:
            for row, col, content in sheet.cells():
                if content.is_formula:
                    yield CellAddress(sheet.name, col, row), content


def _build_content(raw: str, origin: CellAddress) -> CellContent:
    """Classify and, for formulas, parse one cell. Raises LoadError on bad formulas."""
    from . import formula  # deferred: formula depends on this module's address types

    raw = raw.strip()
    kind = classify_content(raw)
    if kind is ContentKind.EMPTY:
        return EMPTY_CELL
    if kind is ContentKind.FORMULA:
        try:
            ast = formula.parse(raw, origin)
        except formula.ParseError as exc:
            raise LoadError(f"formula parse error: {exc}", sheet=origin.sheet, addr=origin.a1) from exc
        return CellContent(ContentKind.FORMULA, raw, ast=ast)
    if kind is ContentKind.NUMBER:
        return CellContent(ContentKind.NUMBER, raw, value=float(raw))
    if kind is ContentKind.BOOLEAN:
        return CellContent(ContentKind.BOOLEAN, raw, value=raw.upper() == "TRUE")
    return CellContent(ContentKind.TEXT, raw, value=raw)


def load_fgj(document: dict, source: str = "<fgj>") -> Workbook:
    """Build a Workbook from a parsed Formula-Grid JSON document."""
    if not isinstance(document, dict):
        raise LoadError(f"{source}: FGJ document must be a JSON object")
    name = document.get("workbook")
    if not isinstance(name, str) or not name:
        raise LoadError(f"{source}: missing or invalid 'workbook' name")
    sheets_doc = document.get("sheets")
    if not isinstance(sheets_doc, list):
        raise LoadError(f"{source}: 'sheets' must be a list")

    sheets: list[Sheet] = []
    seen_names: set[str] = set()
    for sheet_doc in sheets_doc:
        if not isinstance(sheet_doc, dict) or not isinstance(sheet_doc.get("name"), str):
            raise LoadError(f"{source}: each sheet needs a string 'name'")
        sheet_name = sheet_doc["name"]
        if sheet_name in seen_names:
            raise LoadError("duplicate sheet name", sheet=sheet_name)
        seen_names.add(sheet_name)
        cells_doc = sheet_doc.get("cells", [])
        if not isinstance(cells_doc, list):
            raise LoadError("'cells' must be a list", sheet=sheet_name)
        cells: dict[tuple[int, int], CellContent] = {}
        for cell_doc in cells_doc:
            if not isinstance(cell_doc, dict) or "addr" not in cell_doc or "content" not in cell_doc:
                raise LoadError("each cell needs 'addr' and 'content'", sheet=sheet_name)
            try:
                addr = CellAddress.parse(str(cell_doc["addr"]), sheet=sheet_name)
            except ValueError as exc:
                raise LoadError(str(exc), sheet=sheet_name, addr=str(cell_doc["addr"])) from exc
            if addr.sheet != sheet_name:
                raise LoadError("cell address names a different sheet", sheet=sheet_name, addr=addr.a1)
            if (addr.row, addr.col) in cells:
                raise LoadError("duplicate cell address", sheet=sheet_name, addr=addr.a1)
            content = _build_content(str(cell_doc["content"]), addr)
            if content.kind is not ContentKind.EMPTY:
                cells[(addr.row, addr.col)] = content
        sheets.append(Sheet(sheet_name, cells))
    return Workbook(name, sheets)


def load_fgj_text(text: str, source: str = "<fgj>") -> Workbook:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{source}: invalid JSON: {exc}") from exc
    return load_fgj(document, source)


def load_csv_sheets(paths: Sequence[Path | str], workbook_name: str | None = None) -> Workbook:
    """One CSV file per sheet; CSV cell (r, c) maps to row r, column c (1-based).

    The sheet name is the file name minus its extension.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise LoadError("no CSV files given")
    sheets = []
    for path in paths:
        sheet_name = path.stem
        cells: dict[tuple[int, int], CellContent] = {}
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                for row_idx, record in enumerate(csv.reader(fh), start=1):
                    for col_idx, raw in enumerate(record, start=1):
                        addr = CellAddress(sheet_name, col_idx, row_idx)
                        content = _build_content(raw, addr)
                        if content.kind is not ContentKind.EMPTY:
                            cells[(row_idx, col_idx)] = content
        except OSError as exc:
            raise LoadError(f"cannot read {path}: {exc}", sheet=sheet_name) from exc
        sheets.append(Sheet(sheet_name, cells))
    name = workbook_name if workbook_name is not None else paths[0].parent.name or "workbook"
    return Workbook(name, sheets)


def load_workbook(paths: Sequence[Path | str]) -> Workbook:
    """Load a workbook from one FGJ file or a set of CSV files."""
    paths = [Path(p) for p in paths]
    if not paths:
        raise LoadError("no input files given")
    suffixes = {p.suffix.lower() for p in paths}
    if suffixes <= {".csv"}:
        return load_csv_sheets(sorted(paths))
    if len(paths) == 1:
        path = paths[0]
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LoadError(f"cannot read {path}: {exc}") from exc
        return load_fgj_text(text, source=str(path))
    raise LoadError("pass one FGJ file or a set of .csv files")
