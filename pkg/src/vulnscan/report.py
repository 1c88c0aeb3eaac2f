"""Rendering of scan results, metrics, and diffs: text summary, CSV,
canonical structured JSON, and a static HTML report."""

from __future__ import annotations

import csv
import html
import io
import json

from vulnscan.engine import Finding, ScanResult
from vulnscan.metrics import (
    DensityMetric,
    density,
    language_proportions,
    severity_histogram,
)
from vulnscan.rules import Severity

CSV_HEADER = ["fingerprint", "severity", "rule_id", "title", "path", "line", "snippet", "state"]


def render_structured(result: ScanResult, volatile: bool = True) -> str:
    """Canonical, key-ordered JSON. With volatile=False the timing fields are
    dropped so byte-identical output only depends on scan content."""
    data = result.to_dict()
    if not volatile:
        data.pop("started_at", None)
        data.pop("duration_seconds", None)
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_structured(text: str) -> ScanResult:
    return ScanResult.from_dict(json.loads(text))


def render_csv(findings, states: dict[str, str] | None = None) -> str:
    """RFC-4180 CSV over findings; `states` maps fingerprint to triage state."""
    states = states or {}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for f in findings:
        writer.writerow([
            f.fingerprint,
            f.severity.key,
            f.rule_id,
            f.title,
            f.path,
            f.line,
            f.snippet,
            states.get(f.fingerprint, "unreviewed"),
        ])
    return out.getvalue()


def render_summary(result: ScanResult, density_kind: str = "NCLOC") -> str:
    """Human-readable scan summary mirroring the reported corpus measurements."""
    histogram = severity_histogram(result.findings)
    denominator = result.physical_lines if density_kind == "LOC" else result.code_lines
    if denominator > 0:
        metric = density(len(result.findings), denominator, density_kind)
        if metric.ratio_exact is None:
            density_line = f"Density ({density_kind}): no findings"
        else:
            density_line = (
                f"Density ({density_kind}): {metric.display} "
                f"(ratio {float(metric.ratio_exact):.1f})"
            )
    else:
        density_line = f"Density ({density_kind}): empty corpus"

    lines = [
        "Scan summary",
        "============",
        f"Files:        {result.files}",
        f"LOC:          {result.physical_lines}",
        f"NCLOC:        {result.code_lines}",
        f"Findings:     {len(result.findings)}",
        density_line,
        f"Duration:     {result.duration_seconds:.2f}s",
        f"Rule pack:    {result.pack_name} {result.pack_version}",
        "",
        "Languages:",
    ]
    for lang, percent in language_proportions(result):
        lines.append(f"  {lang:<12} {percent:6.1f}%")
    lines.append("")
    lines.append("Findings by severity:")
    for level in Severity:
        lines.append(f"  {level.label:<20} {histogram[level]}")
    if result.warnings:
        lines.append("")
        lines.append(f"Warnings: {len(result.warnings)}")
    return "\n".join(lines) + "\n"


def render_diff_structured(diff) -> str:
    """Canonical JSON for a baseline diff: new / fixed / persistent arrays."""
    def finding_dicts(findings):
        return [
            {
                "fingerprint": f.fingerprint,
                "rule_id": f.rule_id,
                "title": f.title,
                "severity": f.severity.key,
                "path": f.path,
                "line": f.line,
                "snippet": f.snippet,
            }
            for f in findings
        ]

    data = {
        "schema": 1,
        "new": finding_dicts(diff.new),
        "fixed": finding_dicts(diff.fixed),
        "persistent": finding_dicts(diff.persistent),
        "severity_changes": [
            {"fingerprint": fp, "old": old.key, "new": new.key}
            for fp, old, new in diff.severity_changes
        ],
    }
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# --- HTML report ------------------------------------------------------------

_SEVERITY_COLORS = {
    Severity.CRITICAL: "#b71c1c",
    Severity.HIGH: "#e64a19",
    Severity.MEDIUM: "#f9a825",
    Severity.LOW: "#afb42b",
    Severity.POTENTIAL_ISSUE: "#7cb342",
    Severity.STANDARD: "#42a5f5",
    Severity.SUSPICIOUS_COMMENT: "#9e9e9e",
}

_SORT_SCRIPT = """
function sortTable(col) {
  const table = document.getElementById('findings');
  const rows = Array.from(table.tBodies[0].rows);
  const dir = table.dataset.sortCol == col && table.dataset.sortDir != 'desc' ? 'desc' : 'asc';
  rows.sort((a, b) => {
    let x = a.cells[col].dataset.sort ?? a.cells[col].textContent;
    let y = b.cells[col].dataset.sort ?? b.cells[col].textContent;
    const nx = Number(x), ny = Number(y);
    if (!Number.isNaN(nx) && !Number.isNaN(ny)) { x = nx; y = ny; }
    return (x < y ? -1 : x > y ? 1 : 0) * (dir == 'asc' ? 1 : -1);
  });
  rows.forEach(r => table.tBodies[0].appendChild(r));
  table.dataset.sortCol = col;
  table.dataset.sortDir = dir;
}
"""


def _bar_chart_svg(items: list[tuple[str, int, str]], width: int = 640) -> str:
    """Inline SVG horizontal bar chart from (label, value, color) triples."""
    if not items:
        return "<svg width='0' height='0'></svg>"
    peak = max(value for _, value, _ in items) or 1
    bar_h, gap, label_w = 22, 6, 170
    height = len(items) * (bar_h + gap)
    parts = [f"<svg width='{width}' height='{height}' role='img'>"]
    for i, (label, value, color) in enumerate(items):
        y = i * (bar_h + gap)
        w = int((width - label_w - 60) * value / peak)
        parts.append(
            f"<text x='0' y='{y + bar_h - 6}' font-size='13'>{html.escape(label)}</text>"
            f"<rect x='{label_w}' y='{y}' width='{max(w, 1)}' height='{bar_h}' fill='{color}'/>"
            f"<text x='{label_w + max(w, 1) + 6}' y='{y + bar_h - 6}' font-size='13'>{value}</text>"
        )
    parts.append("</svg>")
    return "".join(parts)


def render_html(result: ScanResult, diff=None, density_kind: str = "NCLOC",
                states: dict[str, str] | None = None) -> str:
    """Self-contained static HTML report: charts inline, table sortable."""
    states = states or {}
    histogram = severity_histogram(result.findings)
    severity_chart = _bar_chart_svg(
        [(level.label, histogram[level], _SEVERITY_COLORS[level]) for level in Severity]
    )
    proportions = language_proportions(result)
    language_chart = _bar_chart_svg(
        [(lang, round(pct * 10), "#5c6bc0") for lang, pct in proportions]
    ) if proportions else ""
    language_rows = "".join(
        f"<li>{html.escape(lang)}: {pct:.1f}%</li>" for lang, pct in proportions
    )

    denominator = result.physical_lines if density_kind == "LOC" else result.code_lines
    if result.findings and denominator > 0:
        metric = density(len(result.findings), denominator, density_kind)
        density_text = f"{metric.display} ({density_kind})"
        banner = ""
    else:
        density_text = "no findings"
        banner = "" if result.findings else "<p class='banner'>No findings.</p>"

    rows = []
    for f in result.findings:
        rows.append(
            "<tr>"
            f"<td data-sort='{int(f.severity)}'>{f.severity.label}</td>"
            f"<td>{html.escape(f.rule_id)}</td>"
            f"<td>{html.escape(f.title)}</td>"
            f"<td>{html.escape(f.path)}</td>"
            f"<td data-sort='{f.line}'>{f.line}</td>"
            f"<td><code>{html.escape(f.snippet)}</code></td>"
            f"<td>{html.escape(states.get(f.fingerprint, 'unreviewed'))}</td>"
            "</tr>"
        )

    diff_block = ""
    if diff is not None:
        diff_block = (
            "<h2>Rescan diff</h2>"
            f"<p>new: {len(diff.new)} &middot; fixed: {len(diff.fixed)} "
            f"&middot; persistent: {len(diff.persistent)}</p>"
        )

    headers = "".join(
        f"<th onclick='sortTable({i})'>{name}</th>"
        for i, name in enumerate(["Severity", "Rule", "Title", "Path", "Line", "Snippet", "State"])
    )
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Scan report</title>
<style>
body {{ font-family: sans-serif; margin: 2em; }}
table {{ border-collapse: collapse; width: 100%; }}
th, td {{ border: 1px solid #ccc; padding: 4px 8px; text-align: left; font-size: 13px; }}
th {{ cursor: pointer; background: #eee; }}
.banner {{ padding: 1em; background: #e8f5e9; border: 1px solid #a5d6a7; }}
</style>
<script>{_SORT_SCRIPT}</script>
</head>
<body>
<h1>Scan report</h1>
<p>Files: {result.files} &middot; LOC: {result.physical_lines} &middot; NCLOC: {result.code_lines}
&middot; Findings: {len(result.findings)} &middot; Density: {density_text}</p>
{banner}
{diff_block}
<h2>Findings by severity</h2>
{severity_chart}
<h2>Language proportions</h2>
{language_chart}
<ul>{language_rows}</ul>
<h2>Findings</h2>
<table id="findings"><thead><tr>{headers}</tr></thead>
<tbody>
{''.join(rows)}
</tbody></table>
</body>
</html>
"""
