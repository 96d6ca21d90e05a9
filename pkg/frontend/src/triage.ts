/**
 * Findings triage: list with status filter, confirm (impact + note) and
 * dismiss actions, and the statistics panel fed by the service.
 */

import type { Finding } from "./api.js";
import type { Workbench } from "./controller.js";

export class TriagePanel {
    constructor(
        private readonly listRoot: HTMLElement,
        private readonly statsRoot: HTMLElement,
        private readonly workbench: Workbench,
    ) {
        workbench.onChange(() => this.render());
    }

    render(): void {
        this.renderStats();
        this.renderList();
    }

    private renderStats(): void {
        this.statsRoot.replaceChildren();
        const stats = this.workbench.findings?.statistics;
        if (!stats) {
            return;
        }
        const title = document.createElement("h3");
        title.textContent = "Error statistics";
        this.statsRoot.appendChild(title);
        const rows = [
            ["errors", String(stats.errors)],
            ["error classes", String(stats.error_classes)],
            ["qualitative", String(stats.impact["qualitative"]?.errors ?? 0)],
            ["quantitative", String(stats.impact["quantitative"]?.errors ?? 0)],
        ];
        const dl = document.createElement("dl");
        for (const [label, value] of rows) {
            const dt = document.createElement("dt");
            dt.textContent = label;
            const dd = document.createElement("dd");
            dd.textContent = value;
            dd.dataset.stat = label.replace(" ", "-");
            dl.append(dt, dd);
        }
        this.statsRoot.appendChild(dl);
        if (this.workbench.lastError !== null) {
            const banner = document.createElement("div");
            banner.className = "banner error";
            banner.textContent = this.workbench.lastError;
            this.statsRoot.appendChild(banner);
        }
    }

    private renderList(): void {
        this.listRoot.replaceChildren();
        const response = this.workbench.findings;
        if (!response) {
            return;
        }
        const filter = document.createElement("select");
        for (const option of ["all", "open", "confirmed_error", "dismissed"]) {
            const el = document.createElement("option");
            el.value = option;
            el.textContent = option;
            el.selected = this.workbench.state.findingsFilter === option;
            filter.appendChild(el);
        }
        filter.addEventListener("change", () => {
            this.workbench.state.findingsFilter = filter.value as typeof this.workbench.state.findingsFilter;
            this.render();
        });
        this.listRoot.appendChild(filter);

        const wanted = this.workbench.state.findingsFilter;
        for (const finding of response.findings) {
            if (wanted !== "all" && finding.status !== wanted) {
                continue;
            }
            this.listRoot.appendChild(this.renderFinding(finding));
        }
    }

    private renderFinding(finding: Finding): HTMLElement {
        const card = document.createElement("div");
        card.className = `finding ${finding.status}`;
        card.dataset.findingId = finding.id;

        const head = document.createElement("div");
        head.className = "finding-head";
        head.textContent = `[${finding.id}] ${finding.category} @ ${finding.location} (${finding.status})`;
        card.appendChild(head);

        const body = document.createElement("div");
        body.textContent = finding.description;
        card.appendChild(body);

        if (finding.status === "open") {
            const impact = document.createElement("select");
            for (const option of ["qualitative", "quantitative"]) {
                const el = document.createElement("option");
                el.value = option;
                el.textContent = option;
                impact.appendChild(el);
            }
            const note = document.createElement("input");
            note.placeholder = "note";
            const confirm = document.createElement("button");
            confirm.textContent = "confirm";
            confirm.addEventListener("click", () => {
                void this.workbench.recordVerdict(finding.id, "confirm", impact.value, note.value);
            });
            const dismiss = document.createElement("button");
            dismiss.textContent = "dismiss";
            dismiss.addEventListener("click", () => {
                void this.workbench.recordVerdict(finding.id, "dismiss", undefined, note.value);
            });
            const actions = document.createElement("div");
            actions.className = "finding-actions";
            actions.append(impact, note, confirm, dismiss);
            card.appendChild(actions);
        } else if (finding.error_record) {
            const record = document.createElement("div");
            record.className = "finding-record";
            record.textContent = `${finding.error_record.impact}: ${finding.error_record.note}`;
            card.appendChild(record);
        }
        return card;
    }
}
