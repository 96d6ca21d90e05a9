import random

import pytest

from genutil import assert_valid_dot, random_workbook, six_cell_workbook
from sheetaudit.equivalence import Level, partition
from sheetaudit.graph import CoverageError, aggregate, cell_graph, export_dot
from sheetaudit.grid import CellAddress, load_fgj


def build(cells, sheet="S", name="wb"):
    doc = {"workbook": name, "sheets": [{"name": sheet, "cells": [{"addr": a, "content": c} for a, c in cells]}]}
    return load_fgj(doc)


class TestCellGraph:
    def test_simple_edge(self):
        wb = build([("A1", "1"), ("B1", "=A1*2")])
        cg = cell_graph(wb)
        assert [(s.a1, d.a1) for s, d in cg.edges] == [("A1", "B1")]

    def test_range_expands_to_three_edges(self):
        wb = build([("A1", "1"), ("A2", "2"), ("A3", "3"), ("C1", "=SUM(A1:A3)")])
        cg = cell_graph(wb)
        assert [(s.a1, d.a1) for s, d in cg.edges] == [("A1", "C1"), ("A2", "C1"), ("A3", "C1")]

    def test_self_loop_marked_cyclic(self):
        wb = build([("A1", "=A1+1")])
        cg = cell_graph(wb)
        assert [(s.a1, d.a1) for s, d in cg.edges] == [("A1", "A1")]
        assert [a.a1 for a in cg.cycles()] == ["A1"]

    def test_longer_cycle_detected(self):
        wb = build([("A1", "=B1+1"), ("B1", "=C1+1"), ("C1", "=A1+1"), ("D1", "=A1*2")])
        cg = cell_graph(wb)
        assert {a.a1 for a in cg.cycles()} == {"A1", "B1", "C1"}

    def test_acyclic_reports_none(self):
        wb = six_cell_workbook()
        assert cell_graph(wb).cycles() == []

    def test_unresolved_sheet_becomes_marked_node(self):
        wb = build([("B1", "=Missing!A1")])
        cg = cell_graph(wb)
        assert any(n.sheet == "Missing" for n in cg.nodes)
        assert {n.qualified for n in cg.unresolved} == {"Missing!A1"}


class TestAggregate:
    def exhaustive_edge_oracle(self, wb, h, visible):
        """Independent re-derivation: map every cell edge through membership."""
        owner = {}
        for cls_id in visible:
            for addr in h.by_id[cls_id].members:
                owner[addr] = cls_id
        expected = {}
        self_deps = {}
        for src, dst in cell_graph(wb).edges:
            dst_id = owner[dst]
            src_id = owner.get(src, f"input:{src.sheet}")
            if src_id == dst_id:
                self_deps[src_id] = self_deps.get(src_id, 0) + 1
                continue
            expected[(src_id, dst_id)] = expected.get((src_id, dst_id), 0) + 1
        return expected, self_deps

    def test_six_cell_example_all_copy_classes(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        ag = aggregate(cell_graph(wb), h, visible)
        expected, _ = self.exhaustive_edge_oracle(wb, h, visible)
        assert {(s, d): w for s, d, w in ag.edges} == expected
        # B1 feeds C1: the {B1,B2} class depends into the {C1} class.
        b_class = h.member_copy_class[CellAddress("Sheet1", 2, 1)]
        c_class = h.member_copy_class[CellAddress("Sheet1", 3, 1)]
        assert (b_class, c_class, 1) in ag.edges
        assert ("input:Sheet1", b_class, 2) in ag.edges
        assert ("input:Sheet1", c_class, 1) in ag.edges

    def test_total_collapse_single_node(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.STRUCTURAL)}
        ag = aggregate(cell_graph(wb), h, visible)
        class_nodes = [n for n in ag.nodes if n.kind == "class"]
        assert len(class_nodes) == len(visible)
        # B1 -> C1 becomes a structural-to-structural edge, inputs feed both.
        expected, self_deps = self.exhaustive_edge_oracle(wb, h, visible)
        assert {(s, d): w for s, d, w in ag.edges} == expected
        assert {n.id: n.self_deps for n in class_nodes if n.self_deps} == self_deps

    def test_missing_coverage_is_contract_error(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        visible.pop()
        with pytest.raises(CoverageError) as err:
            aggregate(cell_graph(wb), h, visible)
        assert err.value.cell is not None

    def test_double_coverage_is_contract_error(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        visible |= {h.classes_at_level(Level.STRUCTURAL)[0].id}
        with pytest.raises(CoverageError):
            aggregate(cell_graph(wb), h, visible)

    def test_intra_class_edges_become_self_deps(self):
        wb = build([("A1", "1"), ("B2", "=A1+B1"), ("C2", "=A1+C1"), ("B1", "=A1*1"), ("C1", "=A1*1")])
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.STRUCTURAL)}
        ag = aggregate(cell_graph(wb), h, visible)
        expected, self_deps = self.exhaustive_edge_oracle(wb, h, visible)
        assert {(s, d): w for s, d, w in ag.edges} == expected
        got_self = {n.id: n.self_deps for n in ag.nodes if n.self_deps}
        assert got_self == self_deps

    def test_conservation_on_random_workbooks(self):
        rng = random.Random(5)
        for _ in range(15):
            wb = random_workbook(rng, max_cells=60)
            h = partition(wb)
            level = rng.choice(list(Level))
            visible = {c.id for c in h.classes_at_level(level)}
            if not visible:
                continue
            cg = cell_graph(wb)
            ag = aggregate(cg, h, visible)
            total = sum(w for _, _, w in ag.edges) + sum(n.self_deps for n in ag.nodes)
            assert total == len(cg.edges)

    def test_mixed_level_antichain_cover(self):
        wb = six_cell_workbook()
        h = partition(wb)
        # Expand one structural class into its copy grandchildren, keep the other intact.
        s_classes = h.classes_at_level(Level.STRUCTURAL)
        expanded, kept = s_classes[0], s_classes[1]
        copies = [
            c.id
            for c in h.classes_at_level(Level.COPY)
            if h.parent_of[h.parent_of[c.id]] == expanded.id
        ]
        visible = set(copies) | {kept.id}
        ag = aggregate(cell_graph(wb), h, visible)
        expected, _ = self.exhaustive_edge_oracle(wb, h, visible)
        assert {(s, d): w for s, d, w in ag.edges} == expected

    def test_singleton_classes_mirror_cell_subgraph(self):
        # All formulas distinct: the area graph is the formula subgraph.
        wb = build([("A1", "1"), ("B1", "=A1*2"), ("C1", "=B1+1"), ("D1", "=C1^2")])
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        ag = aggregate(cell_graph(wb), h, visible)
        addr_of = {h.member_copy_class[a]: a for a, _ in wb.formula_cells()}
        mapped = {
            (addr_of[s].a1 if s in addr_of else s, addr_of[d].a1): w for s, d, w in ag.edges
        }
        assert mapped == {("input:S", "B1"): 1, ("B1", "C1"): 1, ("C1", "D1"): 1}


class TestExportDot:
    def test_empty_graph(self):
        wb = build([("A1", "1")])
        h = partition(wb)
        ag = aggregate(cell_graph(wb), h, set())
        assert export_dot(ag) == "digraph audit {\n}\n"

    def test_one_edge_cell_graph(self):
        wb = build([("A1", "1"), ("B1", "=A1*2")])
        dot = export_dot(cell_graph(wb))
        assert_valid_dot(dot)
        assert '"S!A1" -> "S!B1";' in dot

    def test_byte_identical_reexport(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        first = export_dot(aggregate(cell_graph(wb), h, visible))
        second = export_dot(aggregate(cell_graph(wb), h, visible))
        assert first == second

    def test_weight_labels_only_above_one(self):
        wb = six_cell_workbook()
        h = partition(wb)
        visible = {c.id for c in h.classes_at_level(Level.COPY)}
        dot = export_dot(aggregate(cell_graph(wb), h, visible))
        assert_valid_dot(dot)
        assert '[label="2"]' in dot
        assert '[label="1"]' not in dot

    def test_quote_escaping(self):
        wb = load_fgj(
            {
                "workbook": "w",
                "sheets": [{"name": 'We"ird', "cells": [{"addr": "A1", "content": "1"}, {"addr": "B1", "content": "=A1"}]}],
            }
        )
        dot = export_dot(cell_graph(wb))
        assert_valid_dot(dot)
        assert '\\"' in dot
