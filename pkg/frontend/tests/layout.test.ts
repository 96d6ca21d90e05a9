import { describe, expect, it } from "vitest";

import type { AreaGraph } from "../src/api.js";
import { layerByLongestPath, layout } from "../src/layout.js";

function graph(nodeIds: string[], edges: [string, string][]): AreaGraph {
    return {
        nodes: nodeIds.map((id) => ({ id, kind: "class", label: id, members: 1, self_deps: 0 })),
        edges: edges.map(([src, dst]) => ({ src, dst, weight: 1 })),
    };
}

describe("layerByLongestPath", () => {
    it("sources sit on layer zero, dependents to the right", () => {
        const layers = layerByLongestPath(graph(["in", "a", "b"], [["in", "a"], ["a", "b"]]));
        expect(layers.get("in")).toBe(0);
        expect(layers.get("a")).toBe(1);
        expect(layers.get("b")).toBe(2);
    });

    it("takes the longest path when several exist", () => {
        const layers = layerByLongestPath(
            graph(["in", "a", "b"], [["in", "a"], ["in", "b"], ["a", "b"]]),
        );
        expect(layers.get("b")).toBe(2);
    });

    it("terminates on cycles and self-loops", () => {
        const layers = layerByLongestPath(graph(["a", "b"], [["a", "b"], ["b", "a"], ["a", "a"]]));
        expect(layers.size).toBe(2);
    });
});

describe("layout", () => {
    it("places every node with distinct slots per layer", () => {
        const placed = layout(graph(["in", "a", "b", "c"], [["in", "a"], ["in", "b"], ["a", "c"], ["b", "c"]]));
        expect(placed.nodes).toHaveLength(4);
        const seen = new Set(placed.nodes.map((n) => `${n.layer}:${n.slot}`));
        expect(seen.size).toBe(4);
        expect(placed.width).toBeGreaterThan(0);
        expect(placed.height).toBeGreaterThan(0);
    });

    it("handles the empty graph", () => {
        const placed = layout(graph([], []));
        expect(placed.nodes).toEqual([]);
    });
});
