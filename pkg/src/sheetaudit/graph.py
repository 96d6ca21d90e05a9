"""Cell-level data-flow graph, class-level aggregation, and DOT export.

Edges point precedent -> dependent: data flows from the referenced cell into
the formula that reads it. Aggregation maps cell edges onto the caller's
visible set of equivalence classes; non-formula precedents collapse into one
input node per sheet so data-entry regions do not flood the view.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equivalence import ClassHierarchy
from .formula import referenced_cells
from .grid import CellAddress, Workbook


class CoverageError(Exception):
    """The visible set does not cover every formula cell exactly once."""

    def __init__(self, message: str, cell: CellAddress | None = None):
        self.cell = cell
        super().__init__(message)


@dataclass
class CellGraph:
    nodes: list[CellAddress]  # canonical order
    edges: list[tuple[CellAddress, CellAddress]]  # (precedent, dependent), sorted
    unresolved: set[CellAddress]  # precedents on sheets the workbook lacks
    formula_nodes: set[CellAddress]

    def cycles(self) -> list[CellAddress]:
        """Cells on reference cycles (including direct self-references)."""
        adjacency: dict[CellAddress, list[CellAddress]] = {}
        for src, dst in self.edges:
            adjacency.setdefault(src, []).append(dst)

        index_of: dict[CellAddress, int] = {}
        lowlink: dict[CellAddress, int] = {}
        on_stack: set[CellAddress] = set()
        stack: list[CellAddress] = []
        counter = [0]
        cyclic: set[CellAddress] = set()

        def strongconnect(root: CellAddress) -> None:
            work = [(root, iter(adjacency.get(root, ())))]
            index_of[root] = lowlink[root] = counter[0]
            counter[0] += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                node, it = work[-1]
                advanced = False
                for succ in it:
                    if succ not in index_of:
                        index_of[succ] = lowlink[succ] = counter[0]
                        counter[0] += 1
                        stack.append(succ)
                        on_stack.add(succ)
                        work.append((succ, iter(adjacency.get(succ, ()))))
                        advanced = True
                        break
                    if succ in on_stack:
                        lowlink[node] = min(lowlink[node], index_of[succ])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[node])
                if lowlink[node] == index_of[node]:
                    component = []
                    while True:
                        member = stack.pop()
                        on_stack.discard(member)
                        component.append(member)
                        if member == node:
                            break
                    if len(component) > 1:
                        cyclic.update(component)
                    elif (component[0], component[0]) in self_edges:
                        cyclic.add(component[0])

        self_edges = {(s, d) for s, d in self.edges if s == d}
        for node in self.nodes:
            if node not in index_of:
                strongconnect(node)
        return sorted(cyclic, key=lambda a: (a.sheet, a.row, a.col))


def cell_graph(workbook: Workbook) -> CellGraph:
    """Directed precedent->dependent graph over all resolvable references."""
    nodes: set[CellAddress] = set()
    edges: set[tuple[CellAddress, CellAddress]] = set()
    unresolved: set[CellAddress] = set()
    formula_nodes: set[CellAddress] = set()

    for addr, content in workbook.formula_cells():
        nodes.add(addr)
        formula_nodes.add(addr)
        for p in referenced_cells(content.ast, addr, workbook):
            if not p.in_grid:
                continue  # no valid address to anchor a node on
            src = p.address
            nodes.add(src)
            edges.add((src, addr))
            if not p.sheet_known:
                unresolved.add(src)

    def key(addr: CellAddress) -> tuple:
        return (workbook.sheet_index.get(addr.sheet, len(workbook.sheets)), addr.sheet, addr.row, addr.col)

    return CellGraph(
        nodes=sorted(nodes, key=key),
        edges=sorted(edges, key=lambda e: (key(e[0]), key(e[1]))),
        unresolved=unresolved,
        formula_nodes=formula_nodes,
    )


@dataclass(frozen=True)
class AreaNode:
    id: str
    kind: str  # "class" or "input"
    label: str
    members: int
    self_deps: int = 0


@dataclass
class AreaGraph:
    nodes: list[AreaNode]
    edges: list[tuple[str, str, int]]  # (src id, dst id, weight), sorted

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "kind": n.kind, "label": n.label, "members": n.members, "self_deps": n.self_deps}
                for n in self.nodes
            ],
            "edges": [{"src": s, "dst": d, "weight": w} for s, d, w in self.edges],
        }


def _class_sort_key(class_id: str) -> tuple:
    return (class_id[0], int(class_id[1:]))


def aggregate(cg: CellGraph, hierarchy: ClassHierarchy, visible: set[str]) -> AreaGraph:
    """Collapse the cell graph onto the visible classes.

    `visible` must cover every formula cell exactly once (one class from each
    cell's copy/logical/structural chain); intra-class edges are dropped from
    the edge list but counted as self-dependencies on the node.
    """
    for cid in visible:
        if cid not in hierarchy.by_id:
            raise CoverageError(f"unknown class id {cid!r}")

    owner: dict[CellAddress, str] = {}
    for addr in hierarchy.formula_cells:
        chain = hierarchy.ancestry(addr)
        owners = [cid for cid in chain if cid in visible]
        if not owners:
            raise CoverageError(f"visible set does not cover formula cell {addr.qualified}", cell=addr)
        if len(owners) > 1:
            raise CoverageError(f"visible set covers formula cell {addr.qualified} more than once", cell=addr)
        owner[addr] = owners[0]

    weights: dict[tuple[str, str], int] = {}
    self_deps: dict[str, int] = {}
    input_sheets: list[str] = []
    for src, dst in cg.edges:
        dst_id = owner[dst]
        if src in owner:
            src_id = owner[src]
            if src_id == dst_id:
                self_deps[src_id] = self_deps.get(src_id, 0) + 1
                continue
        else:
            src_id = f"input:{src.sheet}"
            if src.sheet not in input_sheets:
                input_sheets.append(src.sheet)
        weights[(src_id, dst_id)] = weights.get((src_id, dst_id), 0) + 1

    nodes = []
    for cid in sorted(visible, key=_class_sort_key):
        cls = hierarchy.by_id[cid]
        unit = "cell" if cls.size == 1 else "cells"
        label = f"{cid} ({cls.size} {unit}) {cls.representative.qualified}"
        nodes.append(AreaNode(cid, "class", label, cls.size, self_deps.get(cid, 0)))

    for sheet_name in sorted(input_sheets):
        node_id = f"input:{sheet_name}"
        nodes.append(AreaNode(node_id, "input", f"inputs: {sheet_name}", 0, 0))

    edges = sorted(((s, d, w) for (s, d), w in weights.items()), key=lambda e: (e[0], e[1]))
    return AreaGraph(nodes=nodes, edges=edges)


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: AreaGraph | CellGraph) -> str:
    """Deterministic DOT text for either graph; weight labels only when > 1."""
    lines = ["digraph audit {"]
    if isinstance(graph, CellGraph):
        for node in graph.nodes:
            marker = " (unresolved sheet)" if node in graph.unresolved else ""
            lines.append(f"  {_dot_quote(node.qualified)} [label={_dot_quote(node.qualified + marker)}];")
        for src, dst in graph.edges:
            lines.append(f"  {_dot_quote(src.qualified)} -> {_dot_quote(dst.qualified)};")
    else:
        for node in graph.nodes:
            shape = "ellipse" if node.kind == "input" else "box"
            lines.append(f"  {_dot_quote(node.id)} [label={_dot_quote(node.label)}, shape={shape}];")
        for src, dst, weight in graph.edges:
            attrs = f" [label={_dot_quote(str(weight))}]" if weight > 1 else ""
            lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
