/**
 * Client-side layered layout for the dependency view. The service ships pure
 * topology; coordinates are computed here: nodes go into columns by longest
 * path from the sources, rows spread within each column.
 */

import type { AreaGraph } from "./api.js";

export interface PlacedNode {
    id: string;
    layer: number;
    slot: number;
    x: number;
    y: number;
}

export interface Layout {
    nodes: PlacedNode[];
    width: number;
    height: number;
}

export const NODE_W = 170;
export const NODE_H = 46;
const GAP_X = 70;
const GAP_Y = 26;

export function layerByLongestPath(graph: AreaGraph): Map<string, number> {
    const layer = new Map<string, number>();
    const incoming = new Map<string, string[]>();
    for (const node of graph.nodes) {
        incoming.set(node.id, []);
        layer.set(node.id, 0);
    }
    for (const edge of graph.edges) {
        incoming.get(edge.dst)?.push(edge.src);
    }
    // Relax |V| times; self-loops and cycles stop moving once capped.
    const cap = graph.nodes.length;
    for (let pass = 0; pass < cap; pass += 1) {
        let changed = false;
        for (const edge of graph.edges) {
            if (edge.src === edge.dst) {
                continue;
            }
            const want = Math.min((layer.get(edge.src) ?? 0) + 1, cap);
            if (want > (layer.get(edge.dst) ?? 0)) {
                layer.set(edge.dst, want);
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }
    return layer;
}

export function layout(graph: AreaGraph): Layout {
    const layers = layerByLongestPath(graph);
    const byLayer = new Map<number, string[]>();
    for (const node of graph.nodes) {
        const level = layers.get(node.id) ?? 0;
        const bucket = byLayer.get(level) ?? [];
        bucket.push(node.id);
        byLayer.set(level, bucket);
    }
    const placed: PlacedNode[] = [];
    let maxSlot = 0;
    for (const [level, ids] of [...byLayer.entries()].sort((a, b) => a[0] - b[0])) {
        ids.sort();
        ids.forEach((id, slot) => {
            placed.push({
                id,
                layer: level,
                slot,
                x: level * (NODE_W + GAP_X),
                y: slot * (NODE_H + GAP_Y),
            });
            maxSlot = Math.max(maxSlot, slot);
        });
    }
    const layerCount = byLayer.size === 0 ? 0 : Math.max(...byLayer.keys()) + 1;
    return {
        nodes: placed,
        width: layerCount * (NODE_W + GAP_X),
        height: (maxSlot + 1) * (NODE_H + GAP_Y),
    };
}
