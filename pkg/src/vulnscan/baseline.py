"""Baseline persistence and rescan diffing: split a new scan against a saved
one into new / fixed / persistent findings by fingerprint."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from vulnscan.engine import Finding, ScanResult
from vulnscan.rules import Severity


class BaselineError(Exception):
    """Baseline file unreadable, tampered, or incompatible."""


@dataclass(frozen=True)
class Baseline:
    label: str
    created_at: str
    pack_version: str
    fingerprint_scheme: int
    result: ScanResult


def _result_checksum(result: ScanResult) -> str:
    payload = json.dumps(result.to_dict(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def save_baseline(result: ScanResult, path: str | Path, label: str = "baseline") -> Baseline:
    """Write the result plus a digest-protected header; load() round-trips."""
    baseline = Baseline(
        label=label,
        created_at=datetime.now(timezone.utc).isoformat(),
        pack_version=result.pack_version,
        fingerprint_scheme=result.fingerprint_scheme,
        result=result,
    )
    payload = {
        "schema": 1,
        "label": baseline.label,
        "created_at": baseline.created_at,
        "pack_version": baseline.pack_version,
        "fingerprint_scheme": baseline.fingerprint_scheme,
        "checksum": _result_checksum(result),
        "result": result.to_dict(),
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return baseline


def load_baseline(path: str | Path) -> Baseline:
    """Load a baseline file; the stored checksum must verify."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BaselineError(f"cannot read baseline {path}: {exc}") from exc
    try:
        result = ScanResult.from_dict(data["result"])
        stored = data["checksum"]
    except (KeyError, TypeError) as exc:
        raise BaselineError(f"malformed baseline {path}: missing {exc}") from exc
    if _result_checksum(result) != stored:
        raise BaselineError(f"baseline {path} failed checksum verification")
    return Baseline(
        label=data.get("label", "baseline"),
        created_at=data.get("created_at", ""),
        pack_version=data.get("pack_version", result.pack_version),
        fingerprint_scheme=data.get("fingerprint_scheme", result.fingerprint_scheme),
        result=result,
    )


@dataclass(frozen=True)
class DiffResult:
    new: tuple[Finding, ...]
    fixed: tuple[Finding, ...]
    persistent: tuple[Finding, ...]  # the current-scan copies
    severity_changes: tuple[tuple[str, Severity, Severity], ...]
    pack_changed: bool


def diff(baseline: Baseline | ScanResult, current: ScanResult) -> DiffResult:
    """Partition by fingerprint: new = current minus baseline, fixed =
    baseline minus current, persistent = intersection (current copies).

    A persistent finding whose severity changed under a new rule pack is
    reported as a severity-change annotation, not as fixed+new.
    """
    base_result = baseline.result if isinstance(baseline, Baseline) else baseline
    if base_result.fingerprint_scheme != current.fingerprint_scheme:
        raise BaselineError(
            f"fingerprint scheme mismatch: baseline {base_result.fingerprint_scheme}, "
            f"current {current.fingerprint_scheme}"
        )

    base_by_fp = {f.fingerprint: f for f in base_result.findings}
    cur_by_fp = {f.fingerprint: f for f in current.findings}

    new = tuple(f for f in current.findings if f.fingerprint not in base_by_fp)
    fixed = tuple(f for f in base_result.findings if f.fingerprint not in cur_by_fp)
    persistent = tuple(f for f in current.findings if f.fingerprint in base_by_fp)
    severity_changes = tuple(
        (f.fingerprint, base_by_fp[f.fingerprint].severity, f.severity)
        for f in persistent
        if base_by_fp[f.fingerprint].severity != f.severity
    )
    return DiffResult(
        new=new,
        fixed=fixed,
        persistent=persistent,
        severity_changes=severity_changes,
        pack_changed=base_result.pack_version != current.pack_version,
    )
