/**
 * Dependency viewer: SVG rendering of the graph the service aggregated for
 * exactly the visible set. Clicking a class node selects it everywhere.
 */

import type { Workbench } from "./controller.js";
import { NODE_H, NODE_W, layout } from "./layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PAD = 16;

export class DependencyView {
    constructor(private readonly root: HTMLElement, private readonly workbench: Workbench) {
        workbench.onChange(() => this.render());
    }

    render(): void {
        this.root.replaceChildren();
        const graph = this.workbench.graph;
        if (graph === null) {
            const banner = document.createElement("div");
            banner.className = "banner error";
            banner.textContent = this.workbench.lastError ?? "dependency graph unavailable";
            this.root.appendChild(banner);
            return;
        }
        const placed = layout(graph);
        const pos = new Map(placed.nodes.map((n) => [n.id, n]));

        const svg = document.createElementNS(SVG_NS, "svg");
        svg.setAttribute("width", String(placed.width + PAD * 2));
        svg.setAttribute("height", String(placed.height + PAD * 2));

        const defs = document.createElementNS(SVG_NS, "defs");
        defs.innerHTML =
            '<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
            '<path d="M 0 0 L 10 5 L 0 10 z"/></marker>';
        svg.appendChild(defs);

        for (const edge of graph.edges) {
            const from = pos.get(edge.src);
            const to = pos.get(edge.dst);
            if (!from || !to) {
                continue;
            }
            const line = document.createElementNS(SVG_NS, "line");
            line.setAttribute("x1", String(from.x + NODE_W + PAD));
            line.setAttribute("y1", String(from.y + NODE_H / 2 + PAD));
            line.setAttribute("x2", String(to.x + PAD));
            line.setAttribute("y2", String(to.y + NODE_H / 2 + PAD));
            line.setAttribute("class", "edge");
            line.setAttribute("marker-end", "url(#arrow)");
            svg.appendChild(line);
            if (edge.weight > 1) {
                const text = document.createElementNS(SVG_NS, "text");
                text.setAttribute("x", String((from.x + NODE_W + to.x) / 2 + PAD));
                text.setAttribute("y", String((from.y + to.y + NODE_H) / 2 + PAD - 4));
                text.setAttribute("class", "edge-weight");
                text.textContent = String(edge.weight);
                svg.appendChild(text);
            }
        }

        for (const node of graph.nodes) {
            const at = pos.get(node.id);
            if (!at) {
                continue;
            }
            const group = document.createElementNS(SVG_NS, "g");
            group.setAttribute("transform", `translate(${at.x + PAD}, ${at.y + PAD})`);
            group.setAttribute("class", `node ${node.kind}` + (this.workbench.state.selected === node.id ? " selected" : ""));

            const rect = document.createElementNS(SVG_NS, "rect");
            rect.setAttribute("width", String(NODE_W));
            rect.setAttribute("height", String(NODE_H));
            rect.setAttribute("rx", node.kind === "input" ? "22" : "6");
            group.appendChild(rect);

            const title = document.createElementNS(SVG_NS, "text");
            title.setAttribute("x", String(NODE_W / 2));
            title.setAttribute("y", String(NODE_H / 2 - 4));
            title.setAttribute("text-anchor", "middle");
            title.textContent = node.kind === "input" ? node.label : `${node.id} (${node.members})`;
            group.appendChild(title);

            const sub = document.createElementNS(SVG_NS, "text");
            sub.setAttribute("x", String(NODE_W / 2));
            sub.setAttribute("y", String(NODE_H / 2 + 14));
            sub.setAttribute("text-anchor", "middle");
            sub.setAttribute("class", "sub");
            sub.textContent = node.self_deps > 0 ? `${node.self_deps} internal edge(s)` : "";
            group.appendChild(sub);

            if (node.kind === "class") {
                group.addEventListener("click", () => void this.workbench.select(node.id));
            }
            svg.appendChild(group);
        }
        this.root.appendChild(svg);
    }
}
