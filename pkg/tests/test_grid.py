import json

import pytest

from sheetaudit.grid import (
    CellAddress,
    ContentKind,
    LoadError,
    Sheet,
    classify_content,
    column_index,
    column_letters,
    load_csv_sheets,
    load_fgj,
    load_fgj_text,
    occupancy_counts,
)


class TestAddresses:
    def test_letters_basics(self):
        assert column_letters(1) == "A"
        assert column_letters(26) == "Z"
        assert column_letters(27) == "AA"
        assert column_letters(18278) == "ZZZ"

    def test_roundtrip_all_columns_to_zzz(self):
        for col in range(1, 18279):
            assert column_index(column_letters(col)) == col

    def test_parse_and_render(self):
        addr = CellAddress.parse("Sheet1!B3")
        assert (addr.sheet, addr.col, addr.row) == ("Sheet1", 2, 3)
        assert addr.a1 == "B3"
        assert addr.qualified == "Sheet1!B3"
        assert CellAddress.parse("B3", sheet="S") == CellAddress("S", 2, 3)

    def test_invalid_addresses(self):
        with pytest.raises(ValueError):
            CellAddress.parse("3B", sheet="S")
        with pytest.raises(ValueError):
            CellAddress("S", 0, 1)
        with pytest.raises(ValueError):
            CellAddress("", 1, 1)


class TestClassify:
    @pytest.mark.parametrize(
        "raw,kind",
        [
            ("=A1+1", ContentKind.FORMULA),
            ("3.5", ContentKind.NUMBER),
            ("Total", ContentKind.TEXT),
            ("", ContentKind.EMPTY),
            ("TRUE", ContentKind.BOOLEAN),
            ("false", ContentKind.BOOLEAN),
            ("-2.5e3", ContentKind.NUMBER),
            ("1,5", ContentKind.TEXT),  # no locale handling
            ("inf", ContentKind.TEXT),
            ("1_000", ContentKind.TEXT),
            ("50%", ContentKind.TEXT),
        ],
    )
    def test_kinds(self, raw, kind):
        assert classify_content(raw) is kind


def fgj(cells, name="wb", sheet="Sheet1"):
    return {"workbook": name, "sheets": [{"name": sheet, "cells": [{"addr": a, "content": c} for a, c in cells]}]}


class TestLoadFgj:
    def test_basic_load(self):
        wb = load_fgj(fgj([("A1", "1"), ("B1", "=A1*2")]))
        sheet = wb.sheets[0]
        assert sheet.occupied == 2
        counts = occupancy_counts(sheet)
        assert counts == (2, 2, 1, 1)
        assert wb.content_at(CellAddress("Sheet1", 2, 1)).kind is ContentKind.FORMULA

    def test_duplicate_sheet_names_rejected(self):
        doc = {"workbook": "wb", "sheets": [{"name": "S", "cells": []}, {"name": "S", "cells": []}]}
        with pytest.raises(LoadError):
            load_fgj(doc)

    def test_duplicate_cell_rejected(self):
        with pytest.raises(LoadError):
            load_fgj(fgj([("A1", "1"), ("A1", "2")]))

    def test_formula_parse_failure_names_cell(self):
        with pytest.raises(LoadError) as err:
            load_fgj(fgj([("B2", "=1+")]))
        assert err.value.sheet == "Sheet1"
        assert err.value.addr == "B2"
        assert "position" in str(err.value)

    def test_empty_content_not_stored(self):
        wb = load_fgj(fgj([("A1", ""), ("B1", "x")]))
        assert wb.sheets[0].occupied == 1

    def test_malformed_json_text(self):
        with pytest.raises(LoadError):
            load_fgj_text("{not json")

    def test_deterministic(self):
        doc = fgj([("B1", "=A1*2"), ("A1", "1"), ("C3", "x")])
        a = load_fgj(json.loads(json.dumps(doc)))
        b = load_fgj(json.loads(json.dumps(doc)))
        assert [(r, c, cc.raw) for r, c, cc in a.sheets[0].cells()] == [
            (r, c, cc.raw) for r, c, cc in b.sheets[0].cells()
        ]


class TestLoadCsv:
    def test_csv_row_mapping(self, tmp_path):
        path = tmp_path / "Data.csv"
        path.write_text('5,=A1+A2,label\n,"quoted, text",\n', encoding="utf-8")
        wb = load_csv_sheets([path])
        sheet = wb.sheets[0]
        assert sheet.name == "Data"
        assert sheet.cell(1, 1).kind is ContentKind.NUMBER
        assert sheet.cell(1, 2).kind is ContentKind.FORMULA
        assert sheet.cell(1, 3).kind is ContentKind.TEXT
        assert sheet.cell(2, 2).raw == "quoted, text"
        assert sheet.cell(2, 1).kind is ContentKind.EMPTY


class TestOccupancy:
    def test_bounding_box_counting(self):
        wb = load_fgj(fgj([("A1", "1"), ("B1", "=A1"), ("B3", "t")]))
        counts = occupancy_counts(wb.sheets[0])
        assert counts == (6, 3, 1, 2)  # box 2x3

    def test_empty_sheet(self):
        assert occupancy_counts(Sheet("S", {})) == (0, 0, 0, 0)

    def test_occupied_is_formulas_plus_literals(self):
        wb = load_fgj(fgj([("A1", "1"), ("A2", "TRUE"), ("A3", "x"), ("B1", "=A1"), ("B2", "=A2")]))
        counts = occupancy_counts(wb.sheets[0])
        assert counts.occupied == counts.formulas + counts.literals
