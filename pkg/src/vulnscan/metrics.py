"""Scan measurements: vulnerability density, severity histograms, language
proportions, and per-group density tables."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from vulnscan.corpus import CorpusInventory
from vulnscan.engine import ScanResult
from vulnscan.rules import Severity

DENOMINATOR_KINDS = ("LOC", "NCLOC")


@dataclass(frozen=True)
class DensityMetric:
    findings_count: int
    denominator_lines: int
    denominator_kind: str  # "LOC" | "NCLOC"
    ratio_exact: Fraction | None  # None when there are no findings

    @property
    def ratio(self) -> float | None:
        return float(self.ratio_exact) if self.ratio_exact is not None else None

    @property
    def display(self) -> str:
        """'1:N' with N the ratio rounded half away from zero."""
        if self.ratio_exact is None:
            return "no findings"
        n = int(self.ratio_exact) + (1 if self.ratio_exact - int(self.ratio_exact) >= Fraction(1, 2) else 0)
        return f"1:{n}"


def density(findings_count: int, lines: int, kind: str = "NCLOC") -> DensityMetric:
    """Lines-per-finding density; zero findings yields the 'no findings' sentinel."""
    if kind not in DENOMINATOR_KINDS:
        raise ValueError(f"unknown denominator kind: {kind!r}")
    if lines <= 0:
        raise ValueError("lines must be positive")
    if findings_count == 0:
        return DensityMetric(0, lines, kind, None)
    return DensityMetric(findings_count, lines, kind, Fraction(lines, findings_count))


def severity_histogram(findings) -> dict[Severity, int]:
    """Counts per severity level; all 7 levels present, zero-filled."""
    counts = {level: 0 for level in Severity}
    for f in findings:
        counts[f.severity] += 1
    return counts


def language_proportions(inventory: CorpusInventory | ScanResult) -> list[tuple[str, float]]:
    """(language, percent of physical LOC), largest share first."""
    if isinstance(inventory, ScanResult):
        per_language = {lang: t["physical_lines"] for lang, t in inventory.languages.items()}
    else:
        per_language = {lang: t.physical_lines for lang, t in inventory.totals.items()}
    total = sum(per_language.values())
    if total == 0:
        return []
    return sorted(
        ((lang, 100.0 * lines / total) for lang, lines in per_language.items() if lines),
        key=lambda item: (-item[1], item[0]),
    )


@dataclass(frozen=True)
class GroupRow:
    group: str
    sloc: int
    dangerous_lines: int  # distinct (path, line) pairs carrying >= 1 finding
    findings: int
    density: DensityMetric


def per_group_density(
    result: ScanResult,
    mapping: dict[str, list[str]] | None = None,
    kind: str = "NCLOC",
) -> list[GroupRow]:
    """Density table grouped by top-level directory, or by a configured
    group -> path-glob mapping. Files matching no configured group land in
    'ungrouped'. Rows sum to the corpus totals."""
    from vulnscan.corpus import glob_to_regex

    if mapping:
        compiled = {group: [glob_to_regex(g) for g in globs] for group, globs in mapping.items()}

        def group_of(path: str) -> str:
            for group, rxs in compiled.items():
                if any(rx.match(path) for rx in rxs):
                    return group
            return "ungrouped"
    else:
        def group_of(path: str) -> str:
            return path.split("/", 1)[0] if "/" in path else "."

    sloc: dict[str, int] = {}
    for f in result.file_summaries:
        lines = f.physical_lines if kind == "LOC" else f.code_lines
        g = group_of(f.path)
        sloc[g] = sloc.get(g, 0) + lines

    findings_per_group: dict[str, int] = {}
    dangerous: dict[str, set[tuple[str, int]]] = {}
    for finding in result.findings:
        g = group_of(finding.path)
        findings_per_group[g] = findings_per_group.get(g, 0) + 1
        dangerous.setdefault(g, set()).add((finding.path, finding.line))

    rows = []
    for group in sorted(set(sloc) | set(findings_per_group)):
        lines = sloc.get(group, 0)
        count = findings_per_group.get(group, 0)
        metric = (
            density(count, lines, kind)
            if lines > 0
            else DensityMetric(count, lines, kind, None)
        )
        rows.append(
            GroupRow(
                group=group,
                sloc=lines,
                dangerous_lines=len(dangerous.get(group, ())),
                findings=count,
                density=metric,
            )
        )
    return rows
