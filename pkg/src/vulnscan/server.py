"""Local HTTP API for the review loop: findings, source context, metrics,
and triage mutation. Read-only on the corpus and scan result; the triage
store is the single write path."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from vulnscan.engine import ScanResult
from vulnscan.metrics import density, language_proportions, severity_histogram
from vulnscan.rules import Severity
from vulnscan.triage import (
    StoreLockedError,
    TRIAGE_STATES,
    TriageError,
    TriageStore,
    apply_triage,
)

DEFAULT_PAGE_SIZE = 50


def create_app(
    result: ScanResult | None,
    corpus_root: str | Path | None,
    store: TriageStore,
    ui_dir: str | Path | None = None,
    density_kind: str = "NCLOC",
) -> FastAPI:
    app = FastAPI(title="vulnscan review API")
    root = Path(corpus_root).resolve() if corpus_root else None

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"schema": 1, "error": message}, status_code=status)

    @app.get("/api/result")
    def api_result():
        if result is None:
            return error(500, "no scan result loaded")
        histogram = severity_histogram(result.findings)
        denominator = result.physical_lines if density_kind == "LOC" else result.code_lines
        if result.findings and denominator > 0:
            metric = density(len(result.findings), denominator, density_kind)
            density_payload = {
                "display": metric.display,
                "ratio": metric.ratio,
                "kind": density_kind,
            }
        else:
            density_payload = {"display": "no findings", "ratio": None, "kind": density_kind}
        return {
            "schema": 1,
            "files": result.files,
            "physical_lines": result.physical_lines,
            "code_lines": result.code_lines,
            "comment_lines": result.comment_lines,
            "blank_lines": result.blank_lines,
            "findings": len(result.findings),
            "pack_name": result.pack_name,
            "pack_version": result.pack_version,
            "severity_histogram": {level.key: histogram[level] for level in Severity},
            "density": density_payload,
            "language_proportions": [
                {"language": lang, "percent": round(pct, 2)}
                for lang, pct in language_proportions(result)
            ],
        }

    @app.get("/api/findings")
    def api_findings(request: Request):
        if result is None:
            return error(500, "no scan result loaded")
        params = request.query_params
        severity_filter = params.get("severity")
        state_filter = params.get("state")
        path_filter = params.get("path")
        try:
            page = int(params.get("page", "1"))
            page_size = int(params.get("page_size", str(DEFAULT_PAGE_SIZE)))
            if page < 1 or page_size < 1:
                raise ValueError
        except ValueError:
            return error(400, "page and page_size must be positive integers")
        if severity_filter is not None:
            try:
                wanted_severity = Severity.parse(severity_filter)
            except ValueError:
                return error(400, f"unknown severity: {severity_filter!r}")
        if state_filter is not None and state_filter not in TRIAGE_STATES:
            return error(400, f"unknown state: {state_filter!r}")

        view = apply_triage(result, store)
        findings = list(result.findings)  # already canonically ordered
        if severity_filter is not None:
            findings = [f for f in findings if f.severity == wanted_severity]
        if state_filter is not None:
            findings = [f for f in findings if view.states[f.fingerprint] == state_filter]
        if path_filter:
            findings = [f for f in findings if path_filter in f.path]

        total = len(findings)
        start = (page - 1) * page_size
        page_items = findings[start:start + page_size]
        return {
            "schema": 1,
            "total": total,
            "page": page,
            "page_size": page_size,
            "counts": {
                "total": view.total,
                "open": view.open_count,
                "suppressed": view.suppressed_count,
            },
            "findings": [
                {
                    "fingerprint": f.fingerprint,
                    "rule_id": f.rule_id,
                    "title": f.title,
                    "severity": f.severity.key,
                    "severity_label": f.severity.label,
                    "path": f.path,
                    "line": f.line,
                    "snippet": f.snippet,
                    "description": f.description,
                    "state": view.states[f.fingerprint],
                }
                for f in page_items
            ],
        }

    @app.get("/api/source")
    def api_source(request: Request):
        params = request.query_params
        rel = params.get("path", "")
        try:
            line = int(params.get("line", "1"))
            context = int(params.get("context", "3"))
            if line < 1 or context < 0:
                raise ValueError
        except ValueError:
            return error(400, "line must be >= 1 and context >= 0")
        if root is None:
            return error(500, "no corpus root configured")
        target = (root / rel).resolve()
        if root not in target.parents and target != root:
            return error(403, "path outside corpus root")
        if not target.is_file():
            return error(404, f"file not found: {rel}")
        lines = target.read_text(encoding="utf-8", errors="replace").splitlines()
        start = max(1, line - context)
        end = min(len(lines), line + context)
        return {
            "schema": 1,
            "path": rel,
            "start_line": start,
            "marked_line": line,
            "lines": [
                {"line": n, "text": lines[n - 1], "marked": n == line}
                for n in range(start, end + 1)
            ],
        }

    @app.post("/api/findings/{fp}/triage")
    async def api_triage(fp: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            return error(422, "body must be JSON")
        state = body.get("state")
        if not isinstance(state, str) or state not in TRIAGE_STATES:
            return error(422, f"invalid state: {state!r}")
        note = str(body.get("note", ""))
        annotator = str(body.get("annotator", ""))
        known = {f.fingerprint for f in result.findings} if result else None
        try:
            record, warnings = store.set_state(fp, state, note=note, annotator=annotator,
                                              known_fingerprints=known)
        except StoreLockedError as exc:
            return error(409, str(exc))
        except TriageError as exc:
            return error(422, str(exc))
        return {
            "schema": 1,
            "record": {
                "fingerprint": record.fingerprint,
                "state": record.state,
                "note": record.note,
                "annotator": record.annotator,
                "updated_at": record.updated_at,
            },
            "warnings": warnings,
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
