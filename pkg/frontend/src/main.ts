import { ApiClient } from "./api.js";
import { Workbench } from "./controller.js";
import { DependencyView } from "./graphview.js";
import { GridView } from "./grid.js";
import { StructureBrowser } from "./tree.js";
import { TriagePanel } from "./triage.js";

function el(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (node === null) {
        throw new Error(`missing #${id}`);
    }
    return node;
}

async function boot(): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8765");
    const workbench = new Workbench(api);

    new StructureBrowser(el("structure"), workbench);
    const grid = new GridView(el("grid"), el("cell-detail"), workbench);
    new DependencyView(el("graph"), workbench);
    new TriagePanel(el("findings"), el("stats"), workbench);

    el("collapse-all").addEventListener("click", () => void workbench.collapseAll());

    try {
        await workbench.init();
        el("title").textContent = workbench.overview.workbook;
        await grid.loadActiveSheet();
    } catch (err) {
        const banner = document.createElement("div");
        banner.className = "banner error";
        banner.textContent = `cannot reach audit service: ${String(err)}`;
        document.body.prepend(banner);
    }
}

void boot();
