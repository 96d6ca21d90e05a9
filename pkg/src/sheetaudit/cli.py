"""Command-line entry point: audit, export-dot, fixture, serve.

Exit codes for `audit`: 0 clean run, 1 findings present, 2 load/parse errors.
The same code 2 covers unreadable or malformed input everywhere.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .areas import DetectorConfig, FindingsStore, collect_findings, default_error_class_key
from .equivalence import Level, partition
from .fixtures import KINDS, FixtureError, generate_fixture
from .graph import aggregate, cell_graph, export_dot
from .grid import LoadError, Workbook, load_workbook
from .report import compute_error_statistics, compute_metrics, emit_report


@dataclass
class AuditConfig:
    inputs: list[str]
    level: Level = Level.COPY
    detector: DetectorConfig = DetectorConfig()
    format: str = "text"
    out_dir: Path = Path(".")
    findings_log: Path | None = None
    bind: str = "127.0.0.1:8765"


def _load(paths: list[str]) -> Workbook:
    return load_workbook(paths)


def _config_from_args(args: argparse.Namespace) -> AuditConfig:
    detector = DetectorConfig(min_flank=args.min_flank, max_gap=args.max_gap)
    out_dir = Path(getattr(args, "out_dir", "."))
    findings_log = Path(args.findings_log) if getattr(args, "findings_log", None) else None
    return AuditConfig(
        inputs=args.input,
        level=Level(args.level),
        detector=detector,
        format=getattr(args, "format", "text"),
        out_dir=out_dir,
        findings_log=findings_log,
        bind=getattr(args, "bind", "127.0.0.1:8765"),
    )


def cmd_audit(config: AuditConfig) -> int:
    try:
        workbook = _load(config.inputs)
    except LoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    hierarchy = partition(workbook)
    findings = collect_findings(workbook, hierarchy, config.detector)

    config.out_dir.mkdir(parents=True, exist_ok=True)
    log_path = config.findings_log or (config.out_dir / "findings.jsonl")
    if log_path.exists():
        log_path.unlink()
    store = FindingsStore(default_error_class_key(workbook, hierarchy), log_path=log_path)
    store.add_findings(findings)

    metrics = compute_metrics(workbook, hierarchy)
    stats = compute_error_statistics(store, hierarchy, workbook)

    report_text = emit_report(metrics, stats, findings, format=config.format, workbook_name=workbook.name)
    suffix = "txt" if config.format == "text" else "json"
    report_path = config.out_dir / f"report.{suffix}"
    report_path.write_text(report_text, encoding="utf-8")
    (config.out_dir / "hierarchy.json").write_text(hierarchy.to_json_text(), encoding="utf-8")

    print(f"{workbook.name}: {len(findings)} finding(s)")
    print(f"report: {report_path}")
    print(f"hierarchy: {config.out_dir / 'hierarchy.json'}")
    print(f"findings log: {log_path}")
    return 1 if findings else 0


def cmd_export_dot(config: AuditConfig) -> int:
    try:
        workbook = _load(config.inputs)
    except LoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    hierarchy = partition(workbook)
    graph = cell_graph(workbook)
    config.out_dir.mkdir(parents=True, exist_ok=True)

    cells_path = config.out_dir / "cells.dot"
    cells_path.write_text(export_dot(graph), encoding="utf-8")

    visible = {c.id for c in hierarchy.classes_at_level(config.level)}
    classes_path = config.out_dir / "classes.dot"
    classes_path.write_text(export_dot(aggregate(graph, hierarchy, visible)), encoding="utf-8")

    print(f"wrote {cells_path} and {classes_path}")
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    try:
        fgj, sidecar = generate_fixture(args.kind, args.seed, rows=args.rows, cols=args.cols, anomalies=args.anomalies)
    except FixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fgj, indent=2) + "\n", encoding="utf-8")
    truth_path = out.with_suffix(".truth.json")
    truth_path.write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out} and {truth_path}")
    return 0


def cmd_serve(config: AuditConfig) -> int:
    from .service import AuditService, make_server

    try:
        workbook = _load(config.inputs)
    except LoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    host, _, port_text = config.bind.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        print(f"error: invalid bind address {config.bind!r}", file=sys.stderr)
        return 2

    service = AuditService(workbook, config.detector, findings_log=config.findings_log)
    try:
        server = make_server(service, host, port, quiet=False)
    except OSError as exc:
        print(f"error: cannot bind {config.bind}: {exc}", file=sys.stderr)
        return 2
    actual_port = server.server_address[1]
    print(f"serving {workbook.name} on http://{host}:{actual_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sheetaudit", description="Spreadsheet auditing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_format: bool = False) -> None:
        p.add_argument("input", nargs="+", help="FGJ file or CSV sheet files")
        p.add_argument("--level", choices=[l.value for l in Level], default="copy", help="hierarchy level for class output")
        p.add_argument("--min-flank", type=int, default=2, help="same-class cells required on each side of a gap")
        p.add_argument("--max-gap", type=int, default=1, help="longest occupied interruption treated as a gap")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        if with_format:
            p.add_argument("--format", choices=["text", "json"], default="text", help="report format")
        p.add_argument("--findings-log", default=None, help="path of the findings JSON-lines log")

    p_audit = sub.add_parser("audit", help="analyze a workbook and write report, hierarchy, findings")
    add_common(p_audit, with_format=True)

    p_dot = sub.add_parser("export-dot", help="write cell-level and class-level DOT graphs")
    add_common(p_dot)

    p_fixture = sub.add_parser("fixture", help="generate a seeded fixture workbook with ground truth")
    p_fixture.add_argument("kind", choices=KINDS)
    p_fixture.add_argument("--seed", type=int, default=1)
    p_fixture.add_argument("--rows", type=int, default=50)
    p_fixture.add_argument("--cols", type=int, default=20)
    p_fixture.add_argument("--anomalies", type=int, default=5)
    p_fixture.add_argument("--out", default="fixture.json", help="FGJ output path (sidecar gets .truth.json)")

    p_serve = sub.add_parser("serve", help="run the HTTP audit service")
    add_common(p_serve)
    p_serve.add_argument("--bind", default="127.0.0.1:8765", help="host:port to listen on")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "audit":
        return cmd_audit(_config_from_args(args))
    if args.command == "export-dot":
        return cmd_export_dot(_config_from_args(args))
    if args.command == "fixture":
        return cmd_fixture(args)
    if args.command == "serve":
        return cmd_serve(_config_from_args(args))
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
