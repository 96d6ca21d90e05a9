/**
 * Structure browser: the three-level class hierarchy as an expandable tree.
 * Expanding a node swaps it for its children in the visible set and triggers
 * a dependency-view refresh through the controller.
 */

import type { Workbench } from "./controller.js";

export class StructureBrowser {
    constructor(private readonly root: HTMLElement, private readonly workbench: Workbench) {
        workbench.onChange(() => this.render());
    }

    render(): void {
        const { state } = this.workbench;
        this.root.replaceChildren();
        const list = document.createElement("ul");
        list.className = "tree";
        for (const id of state.structuralIds) {
            list.appendChild(this.renderNode(id));
        }
        this.root.appendChild(list);
    }

    private renderNode(id: string): HTMLElement {
        const { state } = this.workbench;
        const cls = state.classOf(id);
        const item = document.createElement("li");

        const row = document.createElement("div");
        row.className = "tree-row";
        if (state.selected === id) {
            row.classList.add("selected");
        }

        const toggle = document.createElement("button");
        toggle.className = "tree-toggle";
        if (state.canExpand(id)) {
            toggle.textContent = state.isExpanded(id) ? "▾" : "▸";
            toggle.addEventListener("click", (event) => {
                event.stopPropagation();
                void this.workbench.toggleExpand(id);
            });
        } else {
            toggle.textContent = "•";
            toggle.disabled = true;
        }
        row.appendChild(toggle);

        const label = document.createElement("span");
        label.className = "tree-label";
        const members = cls ? cls.members.length : 0;
        label.textContent = `${id} (${members})`;
        label.title = cls?.fingerprint ?? "";
        row.appendChild(label);

        row.addEventListener("click", () => void this.workbench.select(id));
        item.appendChild(row);

        if (state.isExpanded(id)) {
            const children = document.createElement("ul");
            for (const child of state.children(id)) {
                children.appendChild(this.renderNode(child));
            }
            item.appendChild(children);
        }
        return item;
    }
}
