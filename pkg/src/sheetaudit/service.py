"""HTTP/JSON audit service backing the interactive workbench.

Read endpoints serve the immutable analysis (workbook, hierarchy, classes,
graph aggregations, findings); the single mutating endpoint applies auditor
verdicts, serialized through one lock and appended to the findings log.

Responses are JSON; errors use {"error": code, "message": ..., "cell": ...}.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .areas import DetectorConfig, FindingNotFound, FindingsStore, VerdictError, collect_findings, default_error_class_key, logical_areas
from .equivalence import ClassHierarchy, Level, partition
from .graph import CellGraph, CoverageError, aggregate, cell_graph
from .grid import CellAddress, Workbook, column_letters
from .report import compute_error_statistics


class AuditService:
    """All analysis state for one workbook, shared by the request handlers."""

    def __init__(
        self,
        workbook: Workbook,
        config: DetectorConfig = DetectorConfig(),
        findings_log=None,
    ):
        self.workbook = workbook
        self.config = config
        self.hierarchy: ClassHierarchy = partition(workbook)
        self.cell_graph: CellGraph = cell_graph(workbook)
        self.store = FindingsStore(default_error_class_key(workbook, self.hierarchy), log_path=findings_log)
        self.store.add_findings(collect_findings(workbook, self.hierarchy, config))
        self._areas_by_class: dict[str, list] = {}
        for level in Level:
            for area in logical_areas(self.hierarchy, level):
                self._areas_by_class.setdefault(area.class_id, []).append(area)
        self.verdict_lock = threading.Lock()

    # -- payload builders ---------------------------------------------------

    def workbook_payload(self, sheet_name: str | None, rect: str | None) -> dict:
        sheets = []
        for sheet in self.workbook.sheets:
            box = sheet.box
            sheets.append(
                {
                    "name": sheet.name,
                    "box": None
                    if box is None
                    else {"min_row": box[0], "min_col": box[1], "max_row": box[2], "max_col": box[3]},
                    "occupied": sheet.occupied,
                }
            )
        payload = {"workbook": self.workbook.name, "sheets": sheets}
        if sheet_name is not None:
            sheet = self.workbook.sheet(sheet_name)
            if sheet is None:
                raise ServiceError(404, "not_found", f"unknown sheet {sheet_name!r}")
            if rect is None:
                if sheet.box is None:
                    r1 = c1 = r2 = c2 = 0
                else:
                    r1, c1, r2, c2 = sheet.box
            else:
                r1, c1, r2, c2 = _parse_rect(rect, sheet_name)
            cells = []
            for row in range(r1, r2 + 1):
                for col in range(c1, c2 + 1):
                    content = sheet.cell(row, col)
                    if content.kind.value == "empty":
                        continue
                    addr = CellAddress(sheet_name, col, row)
                    cells.append(
                        {
                            "addr": addr.a1,
                            "row": row,
                            "col": col,
                            "content": content.raw,
                            "kind": content.kind.value,
                            "copy_class": self.hierarchy.member_copy_class.get(addr),
                        }
                    )
            payload["sheet"] = sheet_name
            payload["rect"] = {"min_row": r1, "min_col": c1, "max_row": r2, "max_col": c2}
            payload["cells"] = cells
        return payload

    def class_payload(self, class_id: str) -> dict:
        cls = self.hierarchy.by_id.get(class_id)
        if cls is None:
            raise ServiceError(404, "not_found", f"unknown class id {class_id!r}")
        areas = [
            {
                "sheet": area.sheet,
                "rects": [list(r) for r in area.regions],
                "a1": [_rect_a1(r) for r in area.regions],
            }
            for area in self._areas_by_class.get(class_id, [])
        ]
        return {
            "id": cls.id,
            "level": cls.level.value,
            "fingerprint": cls.fingerprint.key,
            "parent": self.hierarchy.parent_of.get(cls.id),
            "members": [a.qualified for a in cls.members],
            "representative": cls.representative.qualified,
            "areas": areas,
        }

    def graph_payload(self, visible_param: str | None) -> dict:
        if visible_param:
            visible = {v for v in visible_param.split(",") if v}
        else:
            visible = {c.id for c in self.hierarchy.classes_at_level(Level.COPY)}
        try:
            area_graph = aggregate(self.cell_graph, self.hierarchy, visible)
        except CoverageError as exc:
            raise ServiceError(400, "coverage", str(exc), cell=exc.cell.qualified if exc.cell else None)
        return area_graph.to_json()

    def findings_payload(self) -> dict:
        records_by_finding = {r.finding_id: r for r in self.store.records}
        findings = []
        for fid in sorted(self.store.findings, key=lambda f: (len(f), f)):
            finding = self.store.findings[fid]
            doc = finding.to_json()
            record = records_by_finding.get(fid)
            doc["error_record"] = record.to_json() if record else None
            findings.append(doc)
        stats = compute_error_statistics(self.store, self.hierarchy, self.workbook)
        return {"findings": findings, "statistics": stats.total.to_json()}

    def apply_verdict(self, finding_id: str, body: dict) -> dict:
        action = body.get("action")
        if action not in ("confirm", "dismiss"):
            raise ServiceError(400, "bad_request", "action must be 'confirm' or 'dismiss'")
        impact = body.get("impact")
        note = body.get("note", "")
        with self.verdict_lock:
            try:
                finding = self.store.record_verdict(finding_id, action, impact=impact, note=note)
            except FindingNotFound:
                raise ServiceError(404, "not_found", f"unknown finding id {finding_id!r}")
            except VerdictError as exc:
                code = 409 if "not open" in str(exc) else 400
                raise ServiceError(code, "state" if code == 409 else "bad_request", str(exc))
            except ValueError as exc:
                raise ServiceError(400, "bad_request", str(exc))
        doc = finding.to_json()
        record = next((r for r in self.store.records if r.finding_id == finding_id), None)
        doc["error_record"] = record.to_json() if record else None
        return doc


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, cell: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.cell = cell
        super().__init__(message)

    def payload(self) -> dict:
        doc = {"error": self.code, "message": self.message}
        if self.cell is not None:
            doc["cell"] = self.cell
        return doc


def _parse_rect(rect: str, sheet: str) -> tuple[int, int, int, int]:
    m = re.match(r"^([A-Za-z]+[0-9]+):([A-Za-z]+[0-9]+)$", rect)
    if not m:
        raise ServiceError(400, "bad_request", f"invalid rect {rect!r}; expected like A1:D10")
    a = CellAddress.parse(m.group(1), sheet=sheet)
    b = CellAddress.parse(m.group(2), sheet=sheet)
    return min(a.row, b.row), min(a.col, b.col), max(a.row, b.row), max(a.col, b.col)


def _rect_a1(rect: tuple[int, int, int, int]) -> str:
    r1, c1, r2, c2 = rect
    start = f"{column_letters(c1)}{r1}"
    end = f"{column_letters(c2)}{r2}"
    return start if start == end else f"{start}:{end}"


_VERDICT_RE = re.compile(r"^/findings/([^/]+)/verdict$")


class _Handler(BaseHTTPRequestHandler):
    service: AuditService  # injected by make_server
    quiet = True

    def log_message(self, fmt, *args):  # noqa: N802 - stdlib signature
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # noqa: N802
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):  # noqa: N802
        url = urlparse(self.path)
        query = parse_qs(url.query)
        svc = self.service
        try:
            if url.path == "/workbook":
                sheet = query.get("sheet", [None])[0]
                rect = query.get("rect", [None])[0]
                self._send(200, svc.workbook_payload(sheet, rect))
            elif url.path == "/hierarchy":
                self._send(200, svc.hierarchy.to_json())
            elif url.path.startswith("/class/"):
                self._send(200, svc.class_payload(url.path[len("/class/") :]))
            elif url.path == "/graph":
                self._send(200, svc.graph_payload(query.get("visible", [None])[0]))
            elif url.path == "/findings":
                self._send(200, svc.findings_payload())
            else:
                self._send(404, {"error": "not_found", "message": f"no route {url.path}"})
        except ServiceError as exc:
            self._send(exc.status, exc.payload())

    def do_POST(self):  # noqa: N802
        url = urlparse(self.path)
        m = _VERDICT_RE.match(url.path)
        if not m:
            self._send(404, {"error": "not_found", "message": f"no route {url.path}"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8"))
            if not isinstance(body, dict):
                raise ValueError("body must be a JSON object")
        except ValueError as exc:
            self._send(400, {"error": "bad_request", "message": f"invalid JSON body: {exc}"})
            return
        try:
            self._send(200, self.service.apply_verdict(m.group(1), body))
        except ServiceError as exc:
            self._send(exc.status, exc.payload())


def make_server(service: AuditService, host: str = "127.0.0.1", port: int = 8765, quiet: bool = True) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service, "quiet": quiet})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(service: AuditService, host: str, port: int, quiet: bool = False) -> None:
    server = make_server(service, host, port, quiet=quiet)
    try:
        server.serve_forever()
    finally:
        server.server_close()
