"""Rule execution over a corpus inventory: findings with stable fingerprints."""

from __future__ import annotations

import hashlib
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from vulnscan.corpus import ClassifiedSource, CorpusInventory, classify_lines, read_text
from vulnscan.languages import profile_for
from vulnscan.rules import Rule, RulePack, Severity

FINGERPRINT_SCHEME = 1


@dataclass(frozen=True)
class Finding:
    fingerprint: str
    rule_id: str
    title: str
    severity: Severity
    path: str
    line: int  # 1-based
    snippet: str  # verbatim source line, trimmed
    description: str
    occurrence_index: int

    def sort_key(self):
        return (int(self.severity), self.path, self.line, self.rule_id)


@dataclass(frozen=True)
class FileSummary:
    path: str
    language: str
    physical_lines: int
    code_lines: int


@dataclass(frozen=True)
class ScanResult:
    started_at: str
    duration_seconds: float
    pack_name: str
    pack_version: str
    fingerprint_scheme: int
    files: int
    physical_lines: int
    code_lines: int
    comment_lines: int
    blank_lines: int
    languages: dict[str, dict[str, int]]  # language -> {files, physical, code, comment, blank}
    file_summaries: tuple[FileSummary, ...]
    findings: tuple[Finding, ...]
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "started_at": self.started_at,
            "duration_seconds": self.duration_seconds,
            "pack_name": self.pack_name,
            "pack_version": self.pack_version,
            "fingerprint_scheme": self.fingerprint_scheme,
            "files": self.files,
            "physical_lines": self.physical_lines,
            "code_lines": self.code_lines,
            "comment_lines": self.comment_lines,
            "blank_lines": self.blank_lines,
            "languages": self.languages,
            "file_summaries": [
                {
                    "path": f.path,
                    "language": f.language,
                    "physical_lines": f.physical_lines,
                    "code_lines": f.code_lines,
                }
                for f in self.file_summaries
            ],
            "findings": [
                {
                    "fingerprint": f.fingerprint,
                    "rule_id": f.rule_id,
                    "title": f.title,
                    "severity": f.severity.key,
                    "path": f.path,
                    "line": f.line,
                    "snippet": f.snippet,
                    "description": f.description,
                    "occurrence_index": f.occurrence_index,
                }
                for f in self.findings
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScanResult":
        return cls(
            started_at=data["started_at"],
            duration_seconds=data["duration_seconds"],
            pack_name=data["pack_name"],
            pack_version=data["pack_version"],
            fingerprint_scheme=data["fingerprint_scheme"],
            files=data["files"],
            physical_lines=data["physical_lines"],
            code_lines=data["code_lines"],
            comment_lines=data["comment_lines"],
            blank_lines=data["blank_lines"],
            languages={k: dict(v) for k, v in data["languages"].items()},
            file_summaries=tuple(
                FileSummary(
                    path=f["path"],
                    language=f["language"],
                    physical_lines=f["physical_lines"],
                    code_lines=f["code_lines"],
                )
                for f in data["file_summaries"]
            ),
            findings=tuple(
                Finding(
                    fingerprint=f["fingerprint"],
                    rule_id=f["rule_id"],
                    title=f["title"],
                    severity=Severity.parse(f["severity"]),
                    path=f["path"],
                    line=f["line"],
                    snippet=f["snippet"],
                    description=f["description"],
                    occurrence_index=f["occurrence_index"],
                )
                for f in data["findings"]
            ),
            warnings=tuple(data["warnings"]),
        )


@dataclass(frozen=True)
class ScanOptions:
    languages: tuple[str, ...] | None = None  # restrict scan to these languages
    severities: tuple[Severity, ...] | None = None  # keep only these severities
    non_comment_only: bool = False  # pattern rules skip comment-classified lines
    workers: int | None = None


def normalize_snippet(line: str) -> str:
    """Collapse internal whitespace and strip the ends."""
    return " ".join(line.split())


def fingerprint(rule_id: str, path: str, normalized_snippet: str, occurrence_index: int) -> str:
    """Deterministic digest over the identifying 4-tuple.

    Line numbers are deliberately excluded so pure line shifts preserve
    identity across rescans.
    """
    payload = "\x00".join((rule_id, path, normalized_snippet, str(occurrence_index)))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class _PairedScope:
    # ident -> line of the live allocation (None once released or never allocated)
    allocations: dict[str, int] = field(default_factory=dict)
    released: dict[str, int] = field(default_factory=dict)  # ident -> release count


def analyze_paired_resources(
    lines: list[str],
    classes: list[str],
    rule: Rule,
) -> tuple[list[tuple[int, str]], list[str]]:
    """Lexical paired-resource analysis (e.g. malloc/free) within brace scopes.

    Returns (matches, warnings) where each match is (1-based line, violation
    kind). Scope is approximated by brace depth: a top-level brace block is
    one scope; unbalanced braces fall back to whole-file scope with a warning.
    """
    alloc_rx, release_rx = rule.compiled_pair()

    depth = 0
    balanced = True
    for lineno, line in enumerate(lines):
        if classes[lineno] == "comment":
            continue
        depth += line.count("{") - line.count("}")
        if depth < 0:
            balanced = False
            break
    if depth != 0:
        balanced = False

    warnings: list[str] = []
    if not balanced:
        warnings.append("unbalanced braces; paired-resource analysis fell back to whole-file scope")

    matches: list[tuple[int, str]] = []
    missing: list[tuple[int, str]] = []
    doubles: list[tuple[int, str]] = []

    def close_scope(scope: _PairedScope):
        for ident, alloc_line in scope.allocations.items():
            if alloc_line is not None and scope.released.get(ident, 0) == 0:
                missing.append((alloc_line, "missing_release"))

    depth = 0
    scope = _PairedScope()
    scope_stack: list[_PairedScope] = []
    for lineno, line in enumerate(lines, 1):
        if classes[lineno - 1] == "comment":
            continue
        alloc_match = alloc_rx.search(line)
        if alloc_match:
            ident = alloc_match.group(1)
            scope.allocations[ident] = lineno
            scope.released[ident] = 0
        else:
            # Any other assignment to a tracked identifier rebinds it.
            for ident in list(scope.released):
                if re.search(rf"\b{re.escape(ident)}\s*=(?!=)", line):
                    scope.released[ident] = 0
                    scope.allocations[ident] = None
        for release_match in release_rx.finditer(line):
            ident = release_match.group(1)
            count = scope.released.get(ident, 0) + 1
            scope.released[ident] = count
            if ident not in scope.allocations:
                scope.allocations[ident] = None
            if count >= 2:
                doubles.append((lineno, "double_release"))
        if balanced:
            for ch in line:
                if ch == "{":
                    if depth == 0:
                        scope_stack.append(scope)
                        scope = _PairedScope()
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        close_scope(scope)
                        scope = scope_stack.pop()
    close_scope(scope)

    wanted = rule.violation
    for lineno, kind in missing + doubles:
        if kind == wanted:
            matches.append((lineno, kind))
    matches.sort()
    return matches, warnings


def _scan_file(
    root: Path,
    summary: FileSummary,
    rules: list[Rule],
    options: ScanOptions,
) -> tuple[list[Finding], list[str]]:
    warnings: list[str] = []
    try:
        content = read_text(root / summary.path)
    except OSError as exc:
        return [], [f"{summary.path}: unreadable during scan ({exc.__class__.__name__})"]

    classified = classify_lines(content, profile_for(summary.language))
    lines = content.splitlines()
    classes = classified.classes

    # (rule, line) pairs; one finding per pair even if a rule matches twice.
    matched: list[tuple[Rule, int]] = []
    for rule in rules:
        if not rule.applies_to_language(summary.language):
            continue
        if rule.matcher == "config_check" and summary.language != "Config":
            continue
        if rule.matcher == "paired_resource":
            pair_matches, pair_warnings = analyze_paired_resources(lines, classes, rule)
            warnings.extend(f"{summary.path}: {w}" for w in pair_warnings)
            for lineno, _kind in pair_matches:
                matched.append((rule, lineno))
            continue
        rx = rule.compiled()
        for lineno, line in enumerate(lines, 1):
            cls = classes[lineno - 1]
            if cls == "blank":
                continue
            if rule.scope == "comment":
                # Suspicious-comment style rules see only comment regions,
                # never string literals.
                target = classified.comment_text[lineno - 1]
                if not target:
                    continue
            else:
                if options.non_comment_only and cls == "comment":
                    continue
                target = line
            if rx.search(target):
                matched.append((rule, lineno))

    matched = sorted(set(matched), key=lambda m: (m[1], m[0].id))
    # occurrence index per (rule, normalized snippet) within the file
    counters: dict[tuple[str, str], int] = {}
    findings: list[Finding] = []
    for rule, lineno in matched:
        raw_line = lines[lineno - 1]
        normalized = normalize_snippet(raw_line)
        key = (rule.id, normalized)
        occurrence = counters.get(key, 0)
        counters[key] = occurrence + 1
        findings.append(
            Finding(
                fingerprint=fingerprint(rule.id, summary.path, normalized, occurrence),
                rule_id=rule.id,
                title=rule.title,
                severity=rule.severity,
                path=summary.path,
                line=lineno,
                snippet=raw_line.strip(),
                description=rule.description,
                occurrence_index=occurrence,
            )
        )
    return findings, warnings


def scan(
    inventory: CorpusInventory,
    pack: RulePack,
    options: ScanOptions | None = None,
) -> ScanResult:
    """Run every rule in `pack` over `inventory` and return the ordered result.

    Per-file scanning runs in parallel; the finding order is canonical
    (severity rank, path, line, rule_id) regardless of worker scheduling.
    """
    options = options or ScanOptions()
    started = datetime.now(timezone.utc)
    t0 = time.monotonic()
    root = Path(inventory.root)
    rules = list(pack.rules)

    summaries = [
        FileSummary(f.path, f.language, f.physical_lines, f.code_lines)
        for f in inventory.files
    ]
    targets = [
        s for s in summaries
        if options.languages is None or s.language in options.languages
    ]

    findings: list[Finding] = []
    warnings: list[str] = list(inventory.warnings)
    with ThreadPoolExecutor(max_workers=options.workers) as pool:
        for file_findings, file_warnings in pool.map(
            lambda s: _scan_file(root, s, rules, options), targets
        ):
            findings.extend(file_findings)
            warnings.extend(file_warnings)

    if options.severities is not None:
        wanted = set(options.severities)
        findings = [f for f in findings if f.severity in wanted]
    findings.sort(key=Finding.sort_key)
    warnings.sort()

    return ScanResult(
        started_at=started.isoformat(),
        duration_seconds=round(time.monotonic() - t0, 6),
        pack_name=pack.name,
        pack_version=pack.version,
        fingerprint_scheme=FINGERPRINT_SCHEME,
        files=inventory.file_count,
        physical_lines=inventory.physical_lines,
        code_lines=inventory.code_lines,
        comment_lines=inventory.comment_lines,
        blank_lines=inventory.blank_lines,
        languages={
            lang: {
                "files": t.files,
                "physical_lines": t.physical_lines,
                "code_lines": t.code_lines,
                "comment_lines": t.comment_lines,
                "blank_lines": t.blank_lines,
            }
            for lang, t in inventory.totals.items()
        },
        file_summaries=tuple(summaries),
        findings=tuple(findings),
        warnings=tuple(warnings),
    )
