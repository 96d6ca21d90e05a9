/**
 * Spreadsheet grid over the service's rectangle paging. Cells of the selected
 * class are highlighted; finding locations get a category badge; clicking a
 * cell shows its raw text and class membership.
 */

import type { GridCell, WorkbookPage } from "./api.js";
import type { Workbench } from "./controller.js";

const BADGES: Record<string, string> = {
    constant_instead_of_formula: "C!",
    constant_instead_of_reference: "R!",
    reference_to_empty_cell: "E!",
    formula_copied_too_far: "F!",
    other: "?!",
};

function columnLetters(index: number): string {
    let out = "";
    let n = index;
    while (n > 0) {
        const rem = (n - 1) % 26;
        out = String.fromCharCode(65 + rem) + out;
        n = Math.floor((n - 1) / 26);
    }
    return out;
}

export class GridView {
    private page: WorkbookPage | null = null;
    private inspected: GridCell | null = null;

    constructor(
        private readonly root: HTMLElement,
        private readonly detail: HTMLElement,
        private readonly workbench: Workbench,
    ) {
        workbench.onChange(() => this.render());
    }

    async loadActiveSheet(): Promise<void> {
        const sheet = this.workbench.state.activeSheet;
        if (sheet === null) {
            return;
        }
        this.page = await this.workbench.api.page(sheet);
        this.render();
    }

    private findingBadge(qualified: string): string | null {
        const findings = this.workbench.findings?.findings ?? [];
        for (const finding of findings) {
            if (finding.location === qualified) {
                return BADGES[finding.category] ?? "?!";
            }
        }
        return null;
    }

    render(): void {
        this.root.replaceChildren();
        const page = this.page;
        if (page === null) {
            return;
        }
        const cells = new Map(page.cells.map((cell) => [`${cell.row}:${cell.col}`, cell]));
        const table = document.createElement("table");
        table.className = "grid";

        const header = document.createElement("tr");
        header.appendChild(document.createElement("th"));
        for (let col = page.rect.min_col; col <= page.rect.max_col; col += 1) {
            const th = document.createElement("th");
            th.textContent = columnLetters(col);
            header.appendChild(th);
        }
        table.appendChild(header);

        for (let row = page.rect.min_row; row <= page.rect.max_row; row += 1) {
            const tr = document.createElement("tr");
            const th = document.createElement("th");
            th.textContent = String(row);
            tr.appendChild(th);
            for (let col = page.rect.min_col; col <= page.rect.max_col; col += 1) {
                tr.appendChild(this.renderCell(page, cells.get(`${row}:${col}`)));
            }
            table.appendChild(tr);
        }
        this.root.appendChild(table);
        this.renderDetail();
    }

    private renderCell(page: WorkbookPage, cell: GridCell | undefined): HTMLElement {
        const td = document.createElement("td");
        if (!cell) {
            td.className = "empty";
            return td;
        }
        const qualified = `${page.sheet}!${cell.addr}`;
        td.textContent = cell.content;
        td.classList.add(cell.kind);
        if (this.workbench.highlight.has(qualified)) {
            td.classList.add("highlight");
        }
        const badge = this.findingBadge(qualified);
        if (badge !== null) {
            const mark = document.createElement("sup");
            mark.className = "badge";
            mark.textContent = badge;
            td.appendChild(mark);
        }
        td.addEventListener("click", () => {
            this.inspected = cell;
            this.renderDetail();
        });
        return td;
    }

    private renderDetail(): void {
        this.detail.replaceChildren();
        const cell = this.inspected;
        if (cell === null || this.page === null) {
            return;
        }
        const lines = [
            `${this.page.sheet}!${cell.addr}: ${cell.content}`,
            `kind: ${cell.kind}`,
            cell.copy_class !== null ? `copy class: ${cell.copy_class}` : "not in any class",
        ];
        for (const line of lines) {
            const p = document.createElement("div");
            p.textContent = line;
            this.detail.appendChild(p);
        }
    }
}
