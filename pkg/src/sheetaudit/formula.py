"""Spreadsheet formula parsing with copy/paste-invariant reference normalization.

References are normalized at parse time: a `$`-anchored axis keeps its absolute
1-based coordinate, a bare axis is stored as the signed offset from the
containing cell (R1C1 style). Two cells whose texts are copy/paste translations
of each other therefore parse to structurally identical trees, which is what
makes copy equivalence a simple key comparison downstream.

Grammar (lowest to highest precedence): comparisons, `&`, `+ -`, `* /`,
`^` (right-associative), `%` postfix. Unary minus binds tighter than the left
operand of `^`, so `-2^2` is `(-2)^2`, matching spreadsheet convention.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .grid import MAX_COL, MAX_ROW, CellAddress, ContentKind, Workbook, column_index, column_letters


class ParseError(Exception):
    """Syntax or reference-range problem, with the character position."""

    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")


class ReferenceRangeError(ParseError):
    """A written reference lies beyond column ZZZ or row 1,048,576."""


class RenderError(Exception):
    """A relative reference does not resolve inside the grid at this origin."""


class TranslationError(Exception):
    """Copy/paste translation would shift a reference out of the grid."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    """One reference axis: absolute 1-based coordinate or signed offset."""

    absolute: bool
    value: int

    def resolve(self, base: int) -> int:
        return self.value if self.absolute else base + self.value


@dataclass(frozen=True)
class Reference:
    col: Axis
    row: Axis
    sheet: str | None = None  # None = the containing cell's own sheet


@dataclass(frozen=True)
class RangeRef:
    start: Reference
    end: Reference

    def __post_init__(self) -> None:
        if self.start.sheet != self.end.sheet:
            raise ValueError("range endpoints must share the same sheet qualifier")


class Node:
    """Base class for formula AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class NumberLit(Node):
    value: float


@dataclass(frozen=True)
class StringLit(Node):
    text: str


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class CellRef(Node):
    ref: Reference


@dataclass(frozen=True)
class Range(Node):
    rng: RangeRef


@dataclass(frozen=True)
class Unary(Node):
    op: str  # "-" prefix or "%" postfix
    child: Node


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class FunctionCall(Node):
    name: str  # upper-cased
    args: tuple[Node, ...]


FormulaAst = Node

COMPARISON_OPS = ("=", "<>", "<=", ">=", "<", ">")
BINARY_OPS = COMPARISON_OPS + ("&", "+", "-", "*", "/", "^")


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<>|[=<>&+\-*/^%])
  | (?P<punct>[$!:(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | string | word | op | punct | eof
    text: str
    pos: int


def _tokenize(text: str) -> Iterator[_Token]:
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos] == '"':
                raise ParseError("unterminated string", pos)
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            yield _Token(m.lastgroup, m.group(), pos)
        pos = m.end()
    yield _Token("eof", "", n)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_LETTERS_DIGITS_RE = re.compile(r"^([A-Za-z]+)([0-9]*)$")


_MAX_DEPTH = 120  # keeps pathological nesting inside Python's recursion limit


class _Parser:
    def __init__(self, text: str, origin: CellAddress):
        self.text = text
        self.origin = origin
        self.tokens = list(_tokenize(text))
        self.i = 0
        self.depth = 0
        self.attempted: list[str] = []

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ParseError("formula too deeply nested", self.cur.pos)

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def peek(self, ahead: int = 1) -> _Token:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> _Token:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        self.attempted = []
        return tok

    def accept(self, kind: str, text: str | None = None) -> _Token | None:
        tok = self.cur
        if tok.kind == kind and (text is None or tok.text == text):
            return self.advance()
        self.attempted.append(text if text is not None else f"<{kind}>")
        return None

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.accept(kind, text)
        if tok is None:
            self.fail()
        return tok

    def fail(self) -> None:
        tok = self.cur
        got = "end of formula" if tok.kind == "eof" else repr(tok.text)
        expected = ", ".join(dict.fromkeys(self.attempted)) or None
        raise ParseError(f"unexpected {got}", tok.pos, expected=expected)

    # -- grammar levels, lowest precedence first --

    def parse_formula(self) -> Node:
        self.expect("op", "=")
        node = self.parse_cmp()
        if self.cur.kind != "eof":
            self.attempted.append("operator or end of formula")
            self.fail()
        return node

    def parse_cmp(self) -> Node:
        self._enter()
        try:
            node = self.parse_concat()
            while True:
                tok = self.cur
                if tok.kind == "op" and tok.text in COMPARISON_OPS:
                    self.advance()
                    node = Binary(tok.text, node, self.parse_concat())
                else:
                    return node
        finally:
            self.depth -= 1

    def parse_concat(self) -> Node:
        node = self.parse_add()
        while self.accept("op", "&"):
            node = Binary("&", node, self.parse_add())
        return node

    def parse_add(self) -> Node:
        node = self.parse_mul()
        while True:
            tok = self.cur
            if tok.kind == "op" and tok.text in ("+", "-"):
                self.advance()
                node = Binary(tok.text, node, self.parse_mul())
            else:
                return node

    def parse_mul(self) -> Node:
        node = self.parse_unary()
        while True:
            tok = self.cur
            if tok.kind == "op" and tok.text in ("*", "/"):
                self.advance()
                node = Binary(tok.text, node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> Node:
        # Exponentiation; the left operand absorbs unary minus first.
        self._enter()
        try:
            node = self.parse_neg()
            if self.accept("op", "^"):
                return Binary("^", node, self.parse_unary())
            return node
        finally:
            self.depth -= 1

    def parse_neg(self) -> Node:
        self._enter()
        try:
            if self.accept("op", "-"):
                return Unary("-", self.parse_neg())
            return self.parse_postfix()
        finally:
            self.depth -= 1

    def parse_postfix(self) -> Node:
        node = self.parse_atom()
        if self.accept("op", "%"):
            return Unary("%", node)
        return node

    def parse_atom(self) -> Node:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return NumberLit(float(tok.text))
        if tok.kind == "string":
            self.advance()
            return StringLit(tok.text[1:-1].replace('""', '"'))
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            node = self.parse_cmp()
            self.expect("punct", ")")
            return node
        if tok.kind == "word":
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.text == "(":
                return self.parse_call()
            if tok.text.upper() in ("TRUE", "FALSE") and not (nxt.kind == "punct" and nxt.text in ("!", "$")):
                self.advance()
                return BoolLit(tok.text.upper() == "TRUE")
            return self.parse_ref_or_range()
        if tok.kind == "punct" and tok.text == "$":
            return self.parse_ref_or_range()
        self.attempted.append("number, string, reference, function call, or '('")
        self.fail()
        raise AssertionError("unreachable")

    def parse_call(self) -> Node:
        name = self.expect("word").text.upper()
        self.expect("punct", "(")
        args: list[Node] = []
        if not self.accept("punct", ")"):
            args.append(self.parse_cmp())
            while self.accept("punct", ","):
                args.append(self.parse_cmp())
            self.expect("punct", ")")
        return FunctionCall(name, tuple(args))

    def parse_ref_or_range(self) -> Node:
        start = self.parse_single_ref()
        if self.accept("punct", ":"):
            pos = self.cur.pos
            end = self.parse_single_ref()
            if end.sheet is not None and start.sheet is not None and end.sheet != start.sheet:
                raise ParseError("range endpoints name different sheets", pos)
            if end.sheet is not None and start.sheet is None:
                raise ParseError("sheet qualifier must be on the range start", pos)
            # Both endpoints carry the same qualifier internally.
            end = Reference(end.col, end.row, start.sheet)
            return Range(RangeRef(start, end))
        return CellRef(start)

    def parse_single_ref(self) -> Reference:
        sheet: str | None = None
        if self.cur.kind == "word" and self.peek().kind == "punct" and self.peek().text == "!":
            sheet = self.advance().text
            self.advance()  # "!"

        col_abs = self.accept("punct", "$") is not None
        word = self.expect("word")
        m = _LETTERS_DIGITS_RE.match(word.text)
        if not m or not m.group(1):
            raise ParseError(f"invalid cell reference {word.text!r}", word.pos)
        letters, digits = m.groups()

        if digits:
            # "A1" or "$A1": the row digits rode along in the word; row is relative.
            row_abs = False
            row_txt, row_pos = digits, word.pos + len(letters)
        else:
            # "A$1" / "$A$1": row anchored, or bare letters which is not a ref.
            if not self.accept("punct", "$"):
                raise ParseError(f"invalid cell reference {word.text!r}", word.pos, expected="'$' and a row number")
            row_abs = True
            num = self.expect("number")
            if not num.text.isdigit():
                raise ParseError(f"row number must be an integer, got {num.text!r}", num.pos)
            row_txt, row_pos = num.text, num.pos

        col_coord = column_index(letters)
        row_coord = int(row_txt)
        if col_coord > MAX_COL:
            raise ReferenceRangeError(f"column {letters.upper()!r} is beyond ZZZ", word.pos)
        if row_coord > MAX_ROW:
            raise ReferenceRangeError(f"row {row_coord} is beyond {MAX_ROW}", row_pos)
        if row_coord < 1:
            raise ParseError(f"row must be >= 1, got {row_coord}", row_pos)

        col = Axis(True, col_coord) if col_abs else Axis(False, col_coord - self.origin.col)
        row = Axis(True, row_coord) if row_abs else Axis(False, row_coord - self.origin.row)
        return Reference(col, row, sheet)


def parse(text: str, origin: CellAddress) -> Node:
    """Parse formula text (starting with '=') into a normalized AST."""
    if not text.startswith("="):
        raise ParseError("formula must begin with '='", 0, expected="'='")
    return _Parser(text, origin).parse_formula()


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

# Grammar level of each construct; a child is parenthesized when its level is
# below what its context requires.
_LEVEL_CMP, _LEVEL_CONCAT, _LEVEL_ADD, _LEVEL_MUL, _LEVEL_POW, _LEVEL_NEG, _LEVEL_POSTFIX, _LEVEL_ATOM = range(8)

_BINARY_LEVEL = {"&": _LEVEL_CONCAT, "+": _LEVEL_ADD, "-": _LEVEL_ADD, "*": _LEVEL_MUL, "/": _LEVEL_MUL, "^": _LEVEL_POW}
for _op in COMPARISON_OPS:
    _BINARY_LEVEL[_op] = _LEVEL_CMP


def _node_level(node: Node) -> int:
    if isinstance(node, Binary):
        return _BINARY_LEVEL[node.op]
    if isinstance(node, Unary):
        return _LEVEL_NEG if node.op == "-" else _LEVEL_POSTFIX
    return _LEVEL_ATOM


def format_number(value: float) -> str:
    """Canonical numeric literal text; re-parses to an equal NumberLit."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _render_axis(axis: Axis, base: int, limit: int, what: str, node: Node) -> tuple[str, int]:
    coord = axis.resolve(base)
    if coord < 1 or coord > limit:
        raise RenderError(f"{what} resolves to {coord}, outside the grid, in {node!r}")
    return ("$" if axis.absolute else ""), coord


def _render_ref(ref: Reference, origin: CellAddress, node: Node) -> str:
    col_prefix, col = _render_axis(ref.col, origin.col, MAX_COL, "column", node)
    row_prefix, row = _render_axis(ref.row, origin.row, MAX_ROW, "row", node)
    sheet = f"{ref.sheet}!" if ref.sheet is not None else ""
    return f"{sheet}{col_prefix}{column_letters(col)}{row_prefix}{row}"


def _render(node: Node, origin: CellAddress, min_level: int) -> str:
    if _node_level(node) < min_level:
        return "(" + _render(node, origin, _LEVEL_CMP) + ")"
    if isinstance(node, NumberLit):
        return format_number(node.value)
    if isinstance(node, StringLit):
        return '"' + node.text.replace('"', '""') + '"'
    if isinstance(node, BoolLit):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, CellRef):
        return _render_ref(node.ref, origin, node)
    if isinstance(node, Range):
        start = _render_ref(node.rng.start, origin, node)
        end_ref = Reference(node.rng.end.col, node.rng.end.row, None)
        return start + ":" + _render_ref(end_ref, origin, node)
    if isinstance(node, Unary):
        if node.op == "-":
            return "-" + _render(node.child, origin, _LEVEL_NEG)
        return _render(node.child, origin, _LEVEL_ATOM) + "%"
    if isinstance(node, Binary):
        level = _BINARY_LEVEL[node.op]
        if node.op == "^":
            # Right-associative; the left side must stay below the '^'.
            return _render(node.left, origin, _LEVEL_NEG) + "^" + _render(node.right, origin, _LEVEL_POW)
        return _render(node.left, origin, level) + node.op + _render(node.right, origin, level + 1)
    if isinstance(node, FunctionCall):
        return node.name + "(" + ",".join(_render(a, origin, _LEVEL_CMP) for a in node.args) + ")"
    raise TypeError(f"unknown node {node!r}")


def render(ast: Node, origin: CellAddress) -> str:
    """A1-notation text that re-parses at `origin` to a node-identical AST."""
    return "=" + _render(ast, origin, _LEVEL_CMP)


# ---------------------------------------------------------------------------
# Copy/paste translation (textual; independent of the parser)
# ---------------------------------------------------------------------------

_TEXT_REF_RE = re.compile(r"(\$?)([A-Za-z]+)(\$?)([0-9]+)")


def translate_a1(text: str, from_addr: CellAddress, to_addr: CellAddress) -> str:
    """The A1 text a spreadsheet would put in `to_addr` after copying `from_addr`.

    Operates on the raw text the way the copy/paste mechanism does: relative
    axes shift by the cell displacement, absolute axes stay put. Deliberately
    does not go through the parser, so it can serve as an oracle for it.
    """
    d_col = to_addr.col - from_addr.col
    d_row = to_addr.row - from_addr.row
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            # Skip string literals ("" is an escaped quote).
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    j += 1
                    break
                j += 1
            out.append(text[i:j])
            i = j
            continue
        m = _TEXT_REF_RE.match(text, i)
        if m:
            prev = text[i - 1] if i > 0 else ""
            nxt = text[m.end()] if m.end() < n else ""
            # Not a reference when glued to a longer word, used as a function
            # name (next is "("), or acting as a sheet name (next is "!").
            prev_blocks = prev.isalnum() or prev in ("_", "$")
            nxt_blocks = nxt.isalnum() or nxt in ("_", "(", "!")
            if not prev_blocks and not nxt_blocks:
                col_anchor, letters, row_anchor, digits = m.groups()
                col = column_index(letters)
                row = int(digits)
                if not col_anchor:
                    col += d_col
                if not row_anchor:
                    row += d_row
                if col < 1 or col > MAX_COL or row < 1 or row > MAX_ROW:
                    raise TranslationError(
                        f"reference {m.group()} shifts out of the grid when copied "
                        f"from {from_addr.qualified} to {to_addr.qualified}"
                    )
                col_text = letters.upper() if col_anchor else column_letters(col)
                out.append(f"{col_anchor}{col_text}{row_anchor}{row}")
                i = m.end()
                continue
        out.append(ch)
        i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Precedent extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Precedent:
    """One resolved reference target; may fall outside the grid or name an unknown sheet."""

    sheet: str
    row: int
    col: int
    in_grid: bool
    sheet_known: bool

    @property
    def address(self) -> CellAddress | None:
        if not self.in_grid:
            return None
        return CellAddress(self.sheet, self.col, self.row)


def _resolve_ref(ref: Reference, origin: CellAddress, workbook: Workbook) -> tuple[str, int, int, bool]:
    sheet = ref.sheet if ref.sheet is not None else origin.sheet
    col = ref.col.resolve(origin.col)
    row = ref.row.resolve(origin.row)
    in_grid = 1 <= col <= MAX_COL and 1 <= row <= MAX_ROW
    return sheet, row, col, in_grid


def referenced_cells(ast: Node, origin: CellAddress, workbook: Workbook) -> set[Precedent]:
    """Every cell the formula references, with ranges expanded to rectangles.

    Out-of-grid resolutions and unknown sheet names are reported as marked
    precedents rather than dropped.
    """
    found: set[Precedent] = set()

    def visit(node: Node) -> None:
        if isinstance(node, CellRef):
            sheet, row, col, in_grid = _resolve_ref(node.ref, origin, workbook)
            found.add(Precedent(sheet, row, col, in_grid, workbook.has_sheet(sheet)))
        elif isinstance(node, Range):
            sheet, row1, col1, _ = _resolve_ref(node.rng.start, origin, workbook)
            _, row2, col2, _ = _resolve_ref(node.rng.end, origin, workbook)
            known = workbook.has_sheet(sheet)
            for row in range(min(row1, row2), max(row1, row2) + 1):
                for col in range(min(col1, col2), max(col1, col2) + 1):
                    in_grid = 1 <= col <= MAX_COL and 1 <= row <= MAX_ROW
                    found.add(Precedent(sheet, row, col, in_grid, known))
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


def empty_precedents(ast: Node, origin: CellAddress, workbook: Workbook) -> list[Precedent]:
    """Precedents that resolve to empty cells, out-of-grid, or unknown sheets."""
    offenders = []
    for p in referenced_cells(ast, origin, workbook):
        if not p.in_grid or not p.sheet_known:
            offenders.append(p)
        elif workbook.content_at(p.address).kind is ContentKind.EMPTY:
            offenders.append(p)
    offenders.sort(key=lambda p: (p.sheet, p.row, p.col))
    return offenders
