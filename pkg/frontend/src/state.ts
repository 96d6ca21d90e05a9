/**
 * Pure browser state: hierarchy expansion, the derived visible-node set, and
 * selection. Expanding a node replaces it by its children in the visible set,
 * so the set always covers every formula cell exactly once by construction.
 */

import type { Hierarchy, HierarchyClass } from "./api.js";

export class BrowserState {
    private readonly expanded = new Set<string>();
    private readonly childrenOf = new Map<string, string[]>();
    private readonly byId = new Map<string, HierarchyClass>();
    readonly structuralIds: string[] = [];
    selected: string | null = null;
    activeSheet: string | null = null;
    findingsFilter: "all" | "open" | "confirmed_error" | "dismissed" = "all";

    constructor(hierarchy: Hierarchy) {
        for (const level of ["structural", "logical", "copy"] as const) {
            for (const cls of hierarchy.levels[level]) {
                this.byId.set(cls.id, cls);
                if (cls.parent !== null) {
                    const siblings = this.childrenOf.get(cls.parent) ?? [];
                    siblings.push(cls.id);
                    this.childrenOf.set(cls.parent, siblings);
                }
                if (level === "structural") {
                    this.structuralIds.push(cls.id);
                }
            }
        }
    }

    classOf(id: string): HierarchyClass | undefined {
        return this.byId.get(id);
    }

    children(id: string): string[] {
        return this.childrenOf.get(id) ?? [];
    }

    isExpanded(id: string): boolean {
        return this.expanded.has(id);
    }

    canExpand(id: string): boolean {
        return this.children(id).length > 0;
    }

    expand(id: string): void {
        if (this.canExpand(id)) {
            this.expanded.add(id);
        }
    }

    collapse(id: string): void {
        this.expanded.delete(id);
    }

    toggle(id: string): void {
        if (this.expanded.has(id)) {
            this.collapse(id);
        } else {
            this.expand(id);
        }
    }

    collapseAll(): void {
        this.expanded.clear();
    }

    /** Class ids currently standing in for every formula cell, exactly once. */
    visibleSet(): string[] {
        const visible: string[] = [];
        const walk = (id: string): void => {
            if (this.expanded.has(id) && this.canExpand(id)) {
                for (const child of this.children(id)) {
                    walk(child);
                }
            } else {
                visible.push(id);
            }
        };
        for (const id of this.structuralIds) {
            walk(id);
        }
        return visible;
    }

    select(id: string | null): void {
        this.selected = id;
    }
}

/** Sanity check mirroring the service's covering contract; used by tests. */
export function coversExactlyOnce(hierarchy: Hierarchy, visible: string[]): boolean {
    const parentOf = new Map<string, string | null>();
    for (const level of ["structural", "logical", "copy"] as const) {
        for (const cls of hierarchy.levels[level]) {
            parentOf.set(cls.id, cls.parent);
        }
    }
    const visibleSet = new Set(visible);
    for (const cls of hierarchy.levels.copy) {
        let hits = 0;
        let current: string | null = cls.id;
        while (current !== null) {
            if (visibleSet.has(current)) {
                hits += 1;
            }
            current = parentOf.get(current) ?? null;
        }
        if (hits !== 1) {
            return false;
        }
    }
    return true;
}
