/**
 * Typed client for the audit service. Every piece of analysis the workbench
 * shows comes from these endpoints; the client holds no analysis logic.
 */

export type LevelName = "copy" | "logical" | "structural";

export interface HierarchyClass {
    id: string;
    level: LevelName;
    fingerprint: string;
    parent: string | null;
    members: string[];
}

export interface Hierarchy {
    workbook: string;
    levels: Record<LevelName, HierarchyClass[]>;
}

export interface SheetBox {
    min_row: number;
    min_col: number;
    max_row: number;
    max_col: number;
}

export interface SheetMeta {
    name: string;
    box: SheetBox | null;
    occupied: number;
}

export interface WorkbookOverview {
    workbook: string;
    sheets: SheetMeta[];
}

export interface GridCell {
    addr: string;
    row: number;
    col: number;
    content: string;
    kind: string;
    copy_class: string | null;
}

export interface WorkbookPage extends WorkbookOverview {
    sheet: string;
    rect: SheetBox;
    cells: GridCell[];
}

export interface ClassArea {
    sheet: string;
    rects: number[][];
    a1: string[];
}

export interface ClassDetail {
    id: string;
    level: LevelName;
    fingerprint: string;
    parent: string | null;
    members: string[];
    representative: string;
    areas: ClassArea[];
}

export interface GraphNode {
    id: string;
    kind: "class" | "input";
    label: string;
    members: number;
    self_deps: number;
}

export interface GraphEdge {
    src: string;
    dst: string;
    weight: number;
}

export interface AreaGraph {
    nodes: GraphNode[];
    edges: GraphEdge[];
}

export interface ErrorRecord {
    finding_id: string;
    impact: "qualitative" | "quantitative";
    note: string;
    error_class_key: string;
}

export interface Finding {
    id: string;
    category: string;
    location: string;
    context: Record<string, unknown>;
    description: string;
    status: "open" | "confirmed_error" | "dismissed";
    error_record: ErrorRecord | null;
}

export interface Statistics {
    name: string;
    error_classes: number;
    errors: number;
    impact: Record<string, { classes: number; errors: number }>;
    categories: Record<string, { classes: number; errors: number }>;
    error_rate: number | null;
    display: Record<string, string>;
}

export interface FindingsResponse {
    findings: Finding[];
    statistics: Statistics;
}

export interface ServiceFailure {
    error: string;
    message: string;
    cell?: string;
}

/** Raised when the service answers with an {error, message} payload. */
export class ServiceError extends Error {
    readonly code: string;
    readonly status: number;
    readonly cell?: string;

    constructor(status: number, failure: ServiceFailure) {
        super(failure.message);
        this.code = failure.error;
        this.status = status;
        this.cell = failure.cell;
    }
}

export class ApiClient {
    constructor(readonly baseUrl: string) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await fetch(this.baseUrl + path, init);
        const body = await response.json();
        if (!response.ok) {
            throw new ServiceError(response.status, body as ServiceFailure);
        }
        return body as T;
    }

    workbook(): Promise<WorkbookOverview> {
        return this.request("/workbook");
    }

    page(sheet: string, rect?: string): Promise<WorkbookPage> {
        const suffix = rect ? `&rect=${encodeURIComponent(rect)}` : "";
        return this.request(`/workbook?sheet=${encodeURIComponent(sheet)}${suffix}`);
    }

    hierarchy(): Promise<Hierarchy> {
        return this.request("/hierarchy");
    }

    classDetail(id: string): Promise<ClassDetail> {
        return this.request(`/class/${encodeURIComponent(id)}`);
    }

    graph(visible: string[]): Promise<AreaGraph> {
        return this.request(`/graph?visible=${visible.map(encodeURIComponent).join(",")}`);
    }

    findings(): Promise<FindingsResponse> {
        return this.request("/findings");
    }

    verdict(findingId: string, action: "confirm" | "dismiss", impact?: string, note?: string): Promise<Finding> {
        return this.request(`/findings/${encodeURIComponent(findingId)}/verdict`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ action, impact, note }),
        });
    }
}
