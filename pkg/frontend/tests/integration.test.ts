/**
 * Workbench synchronization against the real audit service.
 *
 * Each suite spawns `python -m sheetaudit.cli serve` on a demo workbook and
 * drives the actual Workbench controller through the actual HTTP client, so
 * what is asserted here is exactly what the DOM views render.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ServiceError } from "../src/api.js";
import { Workbench } from "../src/controller.js";

const repoRoot = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

interface RunningService {
    proc: ChildProcess;
    baseUrl: string;
}

function startService(workbookPath: string): Promise<RunningService> {
    return new Promise((resolvePromise, reject) => {
        const proc = spawn("python3", ["-m", "sheetaudit.cli", "serve", workbookPath, "--bind", "127.0.0.1:0"], {
            cwd: repoRoot,
        });
        const timer = setTimeout(() => {
            proc.kill();
            reject(new Error("audit service did not start within 15s"));
        }, 15_000);
        let buffered = "";
        proc.stdout?.on("data", (chunk: Buffer) => {
            buffered += chunk.toString();
            const match = buffered.match(/serving .* on (http:\/\/[\d.]+:\d+)/);
            if (match) {
                clearTimeout(timer);
                resolvePromise({ proc, baseUrl: match[1] });
            }
        });
        proc.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`audit service exited early with code ${code}`));
        });
    });
}

function stopService(service: RunningService | undefined): void {
    service?.proc.kill();
}

describe("six-cell workbook synchronization", () => {
    let service: RunningService;
    let workbench: Workbench;

    beforeAll(async () => {
        service = await startService(join(repoRoot, "demo", "six_cell.json"));
        workbench = new Workbench(new ApiClient(service.baseUrl));
        await workbench.init();
    });

    afterAll(() => stopService(service));

    it("selecting each copy class highlights exactly its members", async () => {
        for (const cls of workbench.hierarchy.levels.copy) {
            await workbench.select(cls.id);
            expect(workbench.highlight).toEqual(new Set(cls.members));
            // and the service's /class answer agrees with the hierarchy
            expect(workbench.selectedDetail?.members).toEqual(cls.members);
        }
    });

    it("fully collapsed: the dependency view shows the structural nodes, nothing else", async () => {
        await workbench.collapseAll();
        const visible = workbench.state.visibleSet();
        expect(visible).toEqual(workbench.hierarchy.levels.structural.map((c) => c.id));
        const classNodes = workbench.graph!.nodes.filter((n) => n.kind === "class").map((n) => n.id);
        expect(classNodes.sort()).toEqual([...visible].sort());
    });

    it("expanding a structural node swaps it for its children in the rendered graph", async () => {
        await workbench.collapseAll();
        const target = workbench.hierarchy.levels.structural[0];
        await workbench.toggleExpand(target.id);
        const classNodes = workbench.graph!.nodes.filter((n) => n.kind === "class").map((n) => n.id);
        expect(classNodes).not.toContain(target.id);
        const children = workbench.hierarchy.levels.logical.filter((c) => c.parent === target.id).map((c) => c.id);
        for (const child of children) {
            expect(classNodes).toContain(child);
        }
        expect(classNodes.sort()).toEqual(workbench.state.visibleSet().sort());
    });

    it("node set equals the visible set across arbitrary expansions", async () => {
        for (const id of [...workbench.hierarchy.levels.structural, ...workbench.hierarchy.levels.logical].map((c) => c.id)) {
            await workbench.toggleExpand(id);
            const classNodes = workbench.graph!.nodes.filter((n) => n.kind === "class").map((n) => n.id);
            expect(classNodes.sort()).toEqual(workbench.state.visibleSet().sort());
        }
    });
});

describe("single-structural-class workbook collapses to one node", () => {
    let service: RunningService;

    beforeAll(async () => {
        service = await startService(join(repoRoot, "demo", "mixed_demo.json"));
    });

    afterAll(() => stopService(service));

    it("total collapse renders a single class node", async () => {
        const workbench = new Workbench(new ApiClient(service.baseUrl));
        await workbench.init();
        expect(workbench.hierarchy.levels.structural).toHaveLength(1);
        await workbench.collapseAll();
        const classNodes = workbench.graph!.nodes.filter((n) => n.kind === "class");
        expect(classNodes).toHaveLength(1);
    });
});

describe("finding triage against the live service", () => {
    let service: RunningService;
    let workbench: Workbench;

    beforeAll(async () => {
        service = await startService(join(repoRoot, "demo", "mixed_demo.json"));
        workbench = new Workbench(new ApiClient(service.baseUrl));
        await workbench.init();
    });

    afterAll(() => stopService(service));

    it("confirming a finding increments the statistics panel by one error", async () => {
        const before = workbench.findings!.statistics.errors;
        const open = workbench.findings!.findings.find((f) => f.status === "open")!;
        await workbench.recordVerdict(open.id, "confirm", "quantitative", "verified against source data");
        expect(workbench.findings!.statistics.errors).toBe(before + 1);
        const updated = workbench.findings!.findings.find((f) => f.id === open.id)!;
        expect(updated.status).toBe("confirmed_error");
        expect(updated.error_record?.impact).toBe("quantitative");
    });

    it("dismissing leaves the statistics unchanged", async () => {
        const before = workbench.findings!.statistics.errors;
        const open = workbench.findings!.findings.find((f) => f.status === "open")!;
        await workbench.recordVerdict(open.id, "dismiss", undefined, "deliberate irregularity");
        expect(workbench.findings!.statistics.errors).toBe(before);
        expect(workbench.findings!.findings.find((f) => f.id === open.id)!.status).toBe("dismissed");
    });

    it("a conflicting second verdict surfaces the service error and refetches", async () => {
        const confirmed = workbench.findings!.findings.find((f) => f.status === "confirmed_error")!;
        await workbench.recordVerdict(confirmed.id, "dismiss");
        expect(workbench.lastError).toContain("not open");
        expect(workbench.findings!.findings.find((f) => f.id === confirmed.id)!.status).toBe("confirmed_error");
    });

    it("the raw client raises typed errors for unknown findings", async () => {
        const api = new ApiClient(service.baseUrl);
        await expect(api.verdict("f9999", "dismiss")).rejects.toThrowError(ServiceError);
        await expect(api.verdict("f9999", "dismiss")).rejects.toMatchObject({ status: 404, code: "not_found" });
    });
});

describe("grid paging", () => {
    let service: RunningService;

    beforeAll(async () => {
        const dir = mkdtempSync(join(tmpdir(), "sheetaudit-ui-"));
        const doc = {
            workbook: "page-demo",
            sheets: [
                {
                    name: "Data",
                    cells: [
                        { addr: "A1", content: "1" },
                        { addr: "B1", content: "=A1*2" },
                        { addr: "B2", content: "=A2*2" },
                    ],
                },
            ],
        };
        const path = join(dir, "page.json");
        writeFileSync(path, JSON.stringify(doc));
        service = await startService(path);
    });

    afterAll(() => stopService(service));

    it("pages cells by rectangle and reports class membership per cell", async () => {
        const api = new ApiClient(service.baseUrl);
        const page = await api.page("Data", "A1:B1");
        expect(page.cells.map((c) => c.addr)).toEqual(["A1", "B1"]);
        const b1 = page.cells.find((c) => c.addr === "B1")!;
        expect(b1.kind).toBe("formula");
        expect(b1.copy_class).not.toBeNull();
        const a1 = page.cells.find((c) => c.addr === "A1")!;
        expect(a1.copy_class).toBeNull();
    });
});
