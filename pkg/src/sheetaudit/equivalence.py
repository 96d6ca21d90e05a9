"""Copy/logical/structural fingerprints and the three-level class hierarchy.

Fingerprint keys are canonical s-expression serializations of the AST after
the level's abstraction:

* copy: nothing abstracted — the full normalized tree.
* logical: literals become type-tagged wildcards and absolute axes lose their
  coordinate (the absolute/relative flag itself is kept, as is any sheet
  qualifier); relative offsets must still match.
* structural: only the operator/function skeleton survives; every leaf is the
  same wildcard, and a function keeps its name and arity.

Serialization is injective on the abstracted trees, so key equality is
equivalence at that level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .formula import Axis, Binary, BoolLit, CellRef, FunctionCall, Node, NumberLit, Range, Reference, StringLit, Unary, format_number
from .grid import CellAddress, Workbook


class Level(Enum):
    COPY = "copy"
    LOGICAL = "logical"
    STRUCTURAL = "structural"


LEVELS = (Level.COPY, Level.LOGICAL, Level.STRUCTURAL)


@dataclass(frozen=True)
class Fingerprint:
    level: Level
    key: str


def _axis_key(axis: Axis, level: Level) -> str:
    if axis.absolute:
        return "A[*]" if level is Level.LOGICAL else f"A[{axis.value}]"
    return f"R[{axis.value}]"


def _ref_key(ref: Reference, level: Level) -> str:
    sheet = json.dumps(ref.sheet) if ref.sheet is not None else "~"
    return f"(ref {sheet} {_axis_key(ref.col, level)} {_axis_key(ref.row, level)})"


def _serialize(node: Node, level: Level) -> str:
    structural = level is Level.STRUCTURAL
    if isinstance(node, NumberLit):
        if structural:
            return "?"
        return "(num *)" if level is Level.LOGICAL else f"(num {format_number(node.value)})"
    if isinstance(node, StringLit):
        if structural:
            return "?"
        return "(str *)" if level is Level.LOGICAL else f"(str {json.dumps(node.text)})"
    if isinstance(node, BoolLit):
        if structural:
            return "?"
        return "(bool *)" if level is Level.LOGICAL else f"(bool {node.value})"
    if isinstance(node, CellRef):
        return "?" if structural else _ref_key(node.ref, level)
    if isinstance(node, Range):
        if structural:
            return "?"
        return f"(range {_ref_key(node.rng.start, level)} {_ref_key(node.rng.end, level)})"
    if isinstance(node, Unary):
        return f"(u{node.op} {_serialize(node.child, level)})"
    if isinstance(node, Binary):
        return f"(b{node.op} {_serialize(node.left, level)} {_serialize(node.right, level)})"
    if isinstance(node, FunctionCall):
        args = " ".join(_serialize(a, level) for a in node.args)
        sep = " " if args else ""
        return f"(fn {node.name}/{len(node.args)}{sep}{args})"
    raise TypeError(f"unknown node {node!r}")


def copy_fingerprint(ast: Node) -> Fingerprint:
    return Fingerprint(Level.COPY, _serialize(ast, Level.COPY))


def logical_fingerprint(ast: Node) -> Fingerprint:
    return Fingerprint(Level.LOGICAL, _serialize(ast, Level.LOGICAL))


def structural_fingerprint(ast: Node) -> Fingerprint:
    return Fingerprint(Level.STRUCTURAL, _serialize(ast, Level.STRUCTURAL))


def fingerprint(ast: Node, level: Level) -> Fingerprint:
    return Fingerprint(level, _serialize(ast, level))


_ID_PREFIX = {Level.COPY: "c", Level.LOGICAL: "l", Level.STRUCTURAL: "s"}


@dataclass(frozen=True)
class EquivalenceClass:
    id: str
    level: Level
    fingerprint: Fingerprint
    members: tuple[CellAddress, ...]  # canonical order; representative first

    @property
    def representative(self) -> CellAddress:
        return self.members[0]

    @property
    def size(self) -> int:
        return len(self.members)


class ClassHierarchy:
    """The nested partition of all formula cells at the three levels."""

    def __init__(
        self,
        workbook_name: str,
        classes: dict[Level, list[EquivalenceClass]],
        parent_of: dict[str, str],
        member_copy_class: dict[CellAddress, str],
        cell_order: tuple[CellAddress, ...],
    ):
        self.workbook_name = workbook_name
        self._classes = classes
        self.parent_of = parent_of
        self.member_copy_class = member_copy_class
        self.formula_cells = cell_order  # canonical order
        self.by_id: dict[str, EquivalenceClass] = {c.id: c for level in LEVELS for c in classes[level]}

    def classes_at_level(self, level: Level) -> list[EquivalenceClass]:
        return list(self._classes[level])

    def class_of(self, addr: CellAddress, level: Level) -> EquivalenceClass:
        cid = self.member_copy_class[addr]
        if level is Level.COPY:
            return self.by_id[cid]
        lid = self.parent_of[cid]
        if level is Level.LOGICAL:
            return self.by_id[lid]
        return self.by_id[self.parent_of[lid]]

    def ancestry(self, addr: CellAddress) -> tuple[str, str, str]:
        """(copy id, logical id, structural id) for one formula cell."""
        cid = self.member_copy_class[addr]
        lid = self.parent_of[cid]
        return cid, lid, self.parent_of[lid]

    def to_json(self) -> dict:
        """Canonical serialization; byte-stable for identical workbooks."""
        levels = {}
        for level in LEVELS:
            levels[level.value] = [
                {
                    "id": c.id,
                    "level": level.value,
                    "fingerprint": c.fingerprint.key,
                    "parent": self.parent_of.get(c.id),
                    "members": [a.qualified for a in c.members],
                }
                for c in self._classes[level]
            ]
        return {"workbook": self.workbook_name, "levels": levels}

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"


def partition(workbook: Workbook) -> ClassHierarchy:
    """Partition all formula cells by key equality at the three levels."""
    cells = list(workbook.formula_cells())
    cells.sort(key=lambda pair: workbook.address_key(pair[0]))

    groups: dict[Level, dict[str, list[CellAddress]]] = {level: {} for level in LEVELS}
    for addr, content in cells:
        for level in LEVELS:
            key = _serialize(content.ast, level)
            groups[level].setdefault(key, []).append(addr)

    classes: dict[Level, list[EquivalenceClass]] = {}
    key_to_id: dict[Level, dict[str, str]] = {}
    for level in LEVELS:
        # Members arrive in canonical order, so members[0] is the
        # representative and classes sort by it deterministically.
        unordered = [(key, tuple(members)) for key, members in groups[level].items()]
        unordered.sort(key=lambda kv: workbook.address_key(kv[1][0]))
        level_classes = []
        ids = {}
        for i, (key, members) in enumerate(unordered, start=1):
            cid = f"{_ID_PREFIX[level]}{i}"
            ids[key] = cid
            level_classes.append(EquivalenceClass(cid, level, Fingerprint(level, key), members))
        classes[level] = level_classes
        key_to_id[level] = ids

    asts = {addr: content.ast for addr, content in cells}
    parent_of: dict[str, str] = {}
    member_copy_class: dict[CellAddress, str] = {}
    for copy_class in classes[Level.COPY]:
        rep_ast = asts[copy_class.representative]
        parent_of[copy_class.id] = key_to_id[Level.LOGICAL][_serialize(rep_ast, Level.LOGICAL)]
        for addr in copy_class.members:
            member_copy_class[addr] = copy_class.id
    for logical_class in classes[Level.LOGICAL]:
        rep_ast = asts[logical_class.representative]
        parent_of[logical_class.id] = key_to_id[Level.STRUCTURAL][_serialize(rep_ast, Level.STRUCTURAL)]

    cell_order = tuple(addr for addr, _ in cells)
    return ClassHierarchy(workbook.name, classes, parent_of, member_copy_class, cell_order)


def classes_at_level(hierarchy: ClassHierarchy, level: Level) -> list[EquivalenceClass]:
    return hierarchy.classes_at_level(level)
