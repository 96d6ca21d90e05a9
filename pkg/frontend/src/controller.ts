/**
 * Orchestrates the three interlinked views. All state transitions go through
 * here so the browser, grid, and dependency view never drift apart: selecting
 * a class fetches its member set (the grid highlights exactly that), and any
 * expand/collapse refetches the graph for exactly the visible set.
 */

import { ApiClient } from "./api.js";
import type { AreaGraph, ClassDetail, FindingsResponse, Hierarchy, WorkbookOverview } from "./api.js";
import { BrowserState } from "./state.js";

export type Listener = () => void;

export class Workbench {
    state!: BrowserState;
    hierarchy!: Hierarchy;
    overview!: WorkbookOverview;
    graph: AreaGraph | null = null;
    findings: FindingsResponse | null = null;
    selectedDetail: ClassDetail | null = null;
    /** Qualified addresses ("Sheet!A1") of the selected class's members. */
    highlight: Set<string> = new Set();
    lastError: string | null = null;

    private readonly listeners: Listener[] = [];
    private verdictInFlight = false;

    constructor(readonly api: ApiClient) {}

    onChange(listener: Listener): void {
        this.listeners.push(listener);
    }

    private notify(): void {
        for (const listener of this.listeners) {
            listener();
        }
    }

    async init(): Promise<void> {
        this.hierarchy = await this.api.hierarchy();
        this.overview = await this.api.workbook();
        this.state = new BrowserState(this.hierarchy);
        this.state.activeSheet = this.overview.sheets[0]?.name ?? null;
        this.findings = await this.api.findings();
        await this.refreshGraph();
    }

    async refreshGraph(): Promise<void> {
        try {
            this.graph = await this.api.graph(this.state.visibleSet());
            this.lastError = null;
        } catch (err) {
            this.lastError = String(err);
        }
        this.notify();
    }

    async toggleExpand(classId: string): Promise<void> {
        this.state.toggle(classId);
        await this.refreshGraph();
    }

    async collapseAll(): Promise<void> {
        this.state.collapseAll();
        await this.refreshGraph();
    }

    async select(classId: string | null): Promise<void> {
        this.state.select(classId);
        if (classId === null) {
            this.selectedDetail = null;
            this.highlight = new Set();
        } else {
            this.selectedDetail = await this.api.classDetail(classId);
            this.highlight = new Set(this.selectedDetail.members);
        }
        this.notify();
    }

    async recordVerdict(findingId: string, action: "confirm" | "dismiss", impact?: string, note?: string): Promise<void> {
        if (this.verdictInFlight) {
            return;
        }
        this.verdictInFlight = true;
        try {
            await this.api.verdict(findingId, action, impact, note);
            this.lastError = null;
        } catch (err) {
            this.lastError = String(err);
        } finally {
            this.verdictInFlight = false;
        }
        this.findings = await this.api.findings();
        this.notify();
    }

    async refreshFindings(): Promise<void> {
        this.findings = await this.api.findings();
        this.notify();
    }
}
