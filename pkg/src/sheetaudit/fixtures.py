"""Seeded fixture workbooks with ground-truth sidecars for the detectors.

Every fixture is one sheet of regular formula columns over a data column.
Anomalies are injected at positions sampled with enough spacing that each
seeded irregularity maps to exactly the findings listed in the sidecar:

* interrupted: mid-run constants (or structurally identical formula variants)
* empty-ref: interior data cells deleted under a formula column
* copied-too-far: one formula column extended past the end of the data
* mixed: all three at once

The sidecar lists every finding the detectors are expected to raise,
including the empty-reference findings implied by a copy overrun.
"""

from __future__ import annotations

import random

from .grid import column_letters

KINDS = ("regular", "interrupted", "copied-too-far", "empty-ref", "mixed")

_SCALE, _ADDPREV, _RUNSUM, _ABSMUL = range(4)


class FixtureError(ValueError):
    pass


def _sample_rows(rng: random.Random, lo: int, hi: int, count: int, min_dist: int) -> list[int]:
    candidates = list(range(lo, hi + 1))
    rng.shuffle(candidates)
    chosen: list[int] = []
    for row in candidates:
        if all(abs(row - c) >= min_dist for c in chosen):
            chosen.append(row)
            if len(chosen) == count:
                return sorted(chosen)
    raise FixtureError(
        f"cannot place {count} anomalies in rows {lo}..{hi} with spacing {min_dist}; increase --rows"
    )


def _rich_formula(col: int, row: int) -> str:
    """Column patterns for the regular/interrupted layouts; one class per column."""
    pattern = (col - 2) % 4
    prev = column_letters(col - 1)
    if pattern == _SCALE:
        return f"=A{row}*{col}"
    if pattern == _ADDPREV:
        return f"=A{row}+{prev}{row}"
    if pattern == _RUNSUM:
        return f"=SUM(A$2:A{row})"
    return f"={prev}{row}*$A$1"


def _chain_formula(col: int, row: int) -> str:
    """Each column reads the one before it; keeps anomaly effects local."""
    prev = column_letters(col - 1)
    return f"={prev}{row}*{col}"


def _variant_formula(col: int, row: int, rng: random.Random, chain: bool) -> str | None:
    """A formula in the same structural class but a different logical class,
    or None when the column pattern has no safe variant."""
    k = rng.randint(3, 97)
    if chain:
        return f"={k}*{col}"
    pattern = (col - 2) % 4
    if pattern == _SCALE:
        return f"={k}*{col}"
    if pattern == _ADDPREV:
        return f"=A{row}+{k}"
    return None


def generate_fixture(
    kind: str, seed: int, rows: int = 50, cols: int = 20, anomalies: int = 5
) -> tuple[dict, dict]:
    """Build (FGJ document, ground-truth sidecar) for one fixture kind."""
    if kind not in KINDS:
        raise FixtureError(f"unknown fixture kind {kind!r} (expected one of {', '.join(KINDS)})")
    if cols < 2:
        raise FixtureError("fixtures need at least 2 columns")
    if rows < 8:
        raise FixtureError("fixtures need at least 8 rows")

    rng = random.Random(seed)
    sheet = "Data"
    chain = kind in ("empty-ref", "copied-too-far", "mixed")
    formula_of = _chain_formula if chain else _rich_formula

    cells: dict[tuple[int, int], str] = {}
    cells[(1, 1)] = str(rng.randint(2, 9))  # scaling constant used by $A$1 patterns
    for col in range(2, cols + 1):
        cells[(1, col)] = f"{column_letters(col)}-series"
    for row in range(2, rows + 1):
        cells[(row, 1)] = str(rng.randint(1, 1000))
        for col in range(2, cols + 1):
            cells[(row, col)] = formula_of(col, row)

    truth: list[dict] = []

    def record(col: int, row: int, category: str) -> None:
        truth.append({"addr": f"{sheet}!{column_letters(col)}{row}", "category": category})

    n_interrupt = anomalies if kind in ("interrupted", "mixed") else 0
    n_delete = anomalies if kind in ("empty-ref", "mixed") else 0
    n_overrun = anomalies if kind in ("copied-too-far", "mixed") else 0

    # One global row pool keeps anomalies three rows apart so seeded effects
    # cannot merge runs, move run ends, or shadow one another.
    pool = _sample_rows(rng, 4, rows - 3, n_interrupt + n_delete, 3) if (n_interrupt + n_delete) else []
    rng.shuffle(pool)
    interrupt_rows, delete_rows = pool[:n_interrupt], pool[n_interrupt:]

    for row in sorted(interrupt_rows):
        col = rng.randint(2, cols)
        variant = _variant_formula(col, row, rng, chain)
        if variant is not None and rng.random() < 0.5:
            cells[(row, col)] = variant
            record(col, row, "constant_instead_of_reference")
        else:
            cells[(row, col)] = str(rng.randint(100, 9999))
            record(col, row, "constant_instead_of_formula")

    for row in sorted(delete_rows):
        del cells[(row, 1)]
        record(2, row, "reference_to_empty_cell")

    if n_overrun:
        for extra in range(1, n_overrun + 1):
            row = rows + extra
            cells[(row, 2)] = formula_of(2, row)
            record(2, row, "formula_copied_too_far")
            record(2, row, "reference_to_empty_cell")

    fgj = {
        "workbook": f"fixture-{kind}-{seed}",
        "sheets": [
            {
                "name": sheet,
                "cells": [
                    {"addr": f"{column_letters(col)}{row}", "content": content}
                    for (row, col), content in sorted(cells.items())
                ],
            }
        ],
    }
    truth.sort(key=lambda t: (t["addr"], t["category"]))
    sidecar = {
        "kind": kind,
        "seed": seed,
        "rows": rows,
        "cols": cols,
        "anomalies": truth,
    }
    return fgj, sidecar
