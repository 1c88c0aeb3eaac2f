"""vulnscan: lexical security vulnerability scanner with scan-lifecycle support.

Pipeline: ingest a codebase snapshot, run declarative rule packs over it,
compute density/severity metrics, then support the review loop (reports,
baseline rescans, triage with suppression).
"""

from vulnscan.corpus import CorpusInventory, SourceFile, classify_lines, detect_language, ingest
from vulnscan.engine import Finding, ScanOptions, ScanResult, fingerprint, scan
from vulnscan.rules import Rule, RulePack, Severity, builtin_rules, load_rulepack, validate_pack

__version__ = "0.1.0"

__all__ = [
    "CorpusInventory",
    "SourceFile",
    "classify_lines",
    "detect_language",
    "ingest",
    "Finding",
    "ScanOptions",
    "ScanResult",
    "fingerprint",
    "scan",
    "Rule",
    "RulePack",
    "Severity",
    "builtin_rules",
    "load_rulepack",
    "validate_pack",
]
