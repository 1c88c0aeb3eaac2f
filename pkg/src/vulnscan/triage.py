"""Human triage: per-fingerprint dispositions kept in an append-only log,
working views with suppression, and backlog export."""

from __future__ import annotations

import fcntl
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from vulnscan.engine import Finding, ScanResult

TRIAGE_STATES = ("unreviewed", "confirmed", "false_positive", "accepted_risk", "remediated")
SUPPRESSED_STATES = ("false_positive", "accepted_risk")


class TriageError(Exception):
    """Invalid state name or rejected transition."""


class StoreLockedError(TriageError):
    """Another writer holds the store lock."""


@dataclass(frozen=True)
class TriageRecord:
    fingerprint: str
    state: str
    note: str = ""
    annotator: str = ""
    updated_at: str = ""


class TriageStore:
    """Append-only, line-delimited triage log; the latest entry per
    fingerprint wins and the full history is retained.

    Writes take an advisory exclusive lock on the store file; readers work
    off the last complete entries.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def log_entries(self) -> list[TriageRecord]:
        if not self.path.exists():
            return []
        entries = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            entries.append(TriageRecord(
                fingerprint=data["fingerprint"],
                state=data["state"],
                note=data.get("note", ""),
                annotator=data.get("annotator", ""),
                updated_at=data.get("updated_at", ""),
            ))
        return entries

    def records(self) -> dict[str, TriageRecord]:
        """Current state per fingerprint, replayed from the log."""
        current: dict[str, TriageRecord] = {}
        for entry in self.log_entries():
            current[entry.fingerprint] = entry
        return current

    def states(self) -> dict[str, str]:
        return {fp: rec.state for fp, rec in self.records().items()}

    def set_state(
        self,
        fingerprint: str,
        state: str,
        note: str = "",
        annotator: str = "",
        known_fingerprints: set[str] | None = None,
    ) -> tuple[TriageRecord, list[str]]:
        """Append a new disposition; returns (record, warnings).

        Leaving `remediated` requires a note. Unknown fingerprints are
        accepted with a warning so suppressions can be pre-seeded.
        """
        if state not in TRIAGE_STATES:
            raise TriageError(f"unknown triage state: {state!r}")
        warnings: list[str] = []
        current = self.records().get(fingerprint)
        if current and current.state == "remediated" and state != "remediated" and not note:
            raise TriageError("leaving state 'remediated' requires a note")
        if known_fingerprints is not None and fingerprint not in known_fingerprints:
            warnings.append(f"fingerprint {fingerprint} is not known to any loaded scan")
        record = TriageRecord(
            fingerprint=fingerprint,
            state=state,
            note=note,
            annotator=annotator,
            updated_at=datetime.now(timezone.utc).isoformat(),
        )
        line = json.dumps({
            "fingerprint": record.fingerprint,
            "state": record.state,
            "note": record.note,
            "annotator": record.annotator,
            "updated_at": record.updated_at,
        }, sort_keys=True)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            try:
                fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError as exc:
                raise StoreLockedError(f"triage store is locked: {self.path}") from exc
            try:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
        return record, warnings


@dataclass(frozen=True)
class TriageView:
    """Working view of a scan: suppressed findings excluded, all retained."""

    open_findings: tuple[Finding, ...]
    suppressed_findings: tuple[Finding, ...]
    states: dict[str, str]  # fingerprint -> state for every finding in the scan

    @property
    def total(self) -> int:
        return len(self.open_findings) + len(self.suppressed_findings)

    @property
    def open_count(self) -> int:
        return len(self.open_findings)

    @property
    def suppressed_count(self) -> int:
        return len(self.suppressed_findings)


def apply_triage(result: ScanResult, store: TriageStore | None) -> TriageView:
    """Merge triage states into the scan: false_positive and accepted_risk
    findings drop out of the working view but stay in full exports."""
    stored = store.states() if store is not None else {}
    states = {f.fingerprint: stored.get(f.fingerprint, "unreviewed") for f in result.findings}
    open_findings = tuple(
        f for f in result.findings if states[f.fingerprint] not in SUPPRESSED_STATES
    )
    suppressed = tuple(
        f for f in result.findings if states[f.fingerprint] in SUPPRESSED_STATES
    )
    return TriageView(open_findings=open_findings, suppressed_findings=suppressed, states=states)


@dataclass(frozen=True)
class BacklogRow:
    fingerprint: str
    severity: str
    rule_title: str
    path: str
    line: int
    snippet: str
    state: str
    note: str


def export_backlog(view: TriageView, store: TriageStore | None = None) -> list[BacklogRow]:
    """Prioritized backlog over the working view, ordered by
    (severity rank, path, line)."""
    notes = {fp: rec.note for fp, rec in (store.records() if store else {}).items()}
    rows = [
        BacklogRow(
            fingerprint=f.fingerprint,
            severity=f.severity.key,
            rule_title=f.title,
            path=f.path,
            line=f.line,
            snippet=f.snippet,
            state=view.states[f.fingerprint],
            note=notes.get(f.fingerprint, ""),
        )
        for f in view.open_findings
    ]
    rows.sort(key=lambda r: (_severity_rank(r.severity), r.path, r.line))
    return rows


def _severity_rank(key: str) -> int:
    from vulnscan.rules import Severity

    return int(Severity.parse(key))
