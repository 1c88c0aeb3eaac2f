"""Declarative vulnerability rules: the seven-level severity scale, the rule
model, the plain-text rule-file format, and the built-in rule pack."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from vulnscan.languages import registered_languages


class Severity(enum.IntEnum):
    """Seven ordered levels, rank 1 (most severe) to rank 7."""

    CRITICAL = 1
    HIGH = 2
    MEDIUM = 3
    LOW = 4
    POTENTIAL_ISSUE = 5
    STANDARD = 6
    SUSPICIOUS_COMMENT = 7

    @property
    def label(self) -> str:
        return _SEVERITY_LABELS[self]

    @property
    def key(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Severity":
        normalized = text.strip().lower().replace(" ", "_").replace("-", "_")
        try:
            return _SEVERITY_BY_KEY[normalized]
        except KeyError:
            raise ValueError(f"unknown severity: {text!r}") from None


_SEVERITY_LABELS = {
    Severity.CRITICAL: "Critical",
    Severity.HIGH: "High",
    Severity.MEDIUM: "Medium",
    Severity.LOW: "Low",
    Severity.POTENTIAL_ISSUE: "Potential Issue",
    Severity.STANDARD: "Standard",
    Severity.SUSPICIOUS_COMMENT: "Suspicious Comment",
}

_SEVERITY_BY_KEY = {s.name.lower(): s for s in Severity}
_SEVERITY_BY_KEY.update({"potentialissue": Severity.POTENTIAL_ISSUE,
                         "suspiciouscomment": Severity.SUSPICIOUS_COMMENT})

MATCHER_KINDS = ("pattern", "paired_resource", "config_check")
PAIRED_VIOLATIONS = ("missing_release", "double_release")
RULE_SCOPES = ("any", "comment")


class RulePackError(Exception):
    """Rule file failed to parse or validate."""


@dataclass(frozen=True)
class Rule:
    id: str
    title: str
    severity: Severity
    matcher: str  # one of MATCHER_KINDS
    pattern: str = ""
    alloc_pattern: str = ""
    release_pattern: str = ""
    violation: str = "missing_release"  # paired_resource only
    languages: tuple[str, ...] = ("any",)
    scope: str = "any"  # "comment" restricts matching to comment regions
    description: str = ""
    remediation: str = ""

    def applies_to_language(self, language: str) -> bool:
        return "any" in self.languages or language in self.languages

    def compiled(self) -> re.Pattern[str]:
        return re.compile(self.pattern)

    def compiled_pair(self) -> tuple[re.Pattern[str], re.Pattern[str]]:
        return re.compile(self.alloc_pattern), re.compile(self.release_pattern)


@dataclass(frozen=True)
class RulePack:
    name: str
    version: str
    rules: tuple[Rule, ...]

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    level: str  # "error" | "warning"
    message: str


def merge_packs(*packs: RulePack) -> RulePack:
    """Merge packs into one; duplicate rule ids are a load error."""
    seen: dict[str, str] = {}
    rules: list[Rule] = []
    for pack in packs:
        for rule in pack.rules:
            if rule.id in seen:
                raise RulePackError(
                    f"duplicate rule id {rule.id!r} (in {pack.name!r} and {seen[rule.id]!r})"
                )
            seen[rule.id] = pack.name
            rules.append(rule)
    name = "+".join(p.name for p in packs)
    version = "+".join(p.version for p in packs)
    return RulePack(name=name, version=version, rules=tuple(rules))


def validate_pack(pack: RulePack) -> list[Diagnostic]:
    """Diagnostics for every broken rule invariant; empty list means valid."""
    diags: list[Diagnostic] = []
    known_languages = set(registered_languages()) | {"any", "unknown"}
    seen: set[str] = set()
    for rule in pack.rules:
        if not rule.id:
            diags.append(Diagnostic("", "error", "rule is missing an id"))
            continue
        if rule.id in seen:
            diags.append(Diagnostic(rule.id, "error", "duplicate rule id"))
        seen.add(rule.id)
        if not rule.title:
            diags.append(Diagnostic(rule.id, "error", "missing title"))
        if not isinstance(rule.severity, Severity):
            diags.append(Diagnostic(rule.id, "error", "missing or invalid severity"))
        if rule.matcher not in MATCHER_KINDS:
            diags.append(Diagnostic(rule.id, "error", f"unknown matcher kind {rule.matcher!r}"))
        elif rule.matcher == "paired_resource":
            if not rule.alloc_pattern or not rule.release_pattern:
                diags.append(Diagnostic(rule.id, "error", "paired_resource needs both alloc_pattern and release_pattern"))
            else:
                for name, pat in (("alloc_pattern", rule.alloc_pattern), ("release_pattern", rule.release_pattern)):
                    try:
                        re.compile(pat)
                    except re.error as exc:
                        diags.append(Diagnostic(rule.id, "error", f"{name} does not compile: {exc}"))
            if rule.violation not in PAIRED_VIOLATIONS:
                diags.append(Diagnostic(rule.id, "error", f"unknown violation {rule.violation!r}"))
        else:
            if not rule.pattern:
                diags.append(Diagnostic(rule.id, "error", "missing pattern"))
            else:
                try:
                    re.compile(rule.pattern)
                except re.error as exc:
                    diags.append(Diagnostic(rule.id, "error", f"pattern does not compile: {exc}"))
        if rule.scope not in RULE_SCOPES:
            diags.append(Diagnostic(rule.id, "error", f"unknown scope {rule.scope!r}"))
        for lang in rule.languages:
            if lang not in known_languages:
                diags.append(Diagnostic(rule.id, "warning", f"rule targets unregistered language {lang!r}"))
    return diags


# --- rule file format -------------------------------------------------------
#
# UTF-8 text, one rule per block, blank-line separated. `#` starts a comment
# line. Keys are `key: value`. A leading block with a `pack:` key names the
# pack. Example:
#
#   pack: local-extras
#   version: 1.0
#
#   id: cs.example
#   title: Example rule
#   severity: medium
#   matcher: pattern
#   pattern: Example\(
#   languages: C#

_LIST_KEYS = ("languages",)


def _parse_blocks(text: str) -> list[tuple[int, dict[str, str]]]:
    blocks: list[tuple[int, dict[str, str]]] = []
    current: dict[str, str] = {}
    start_line = 1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip():
            if current:
                blocks.append((start_line, current))
                current = {}
            continue
        if line.lstrip().startswith("#"):
            continue
        if not current:
            start_line = lineno
        key, sep, value = line.partition(":")
        if not sep:
            raise RulePackError(f"line {lineno}: expected 'key: value', got {line!r}")
        current[key.strip()] = value.strip()
    if current:
        blocks.append((start_line, current))
    return blocks


def _rule_from_block(lineno: int, block: dict[str, str]) -> Rule:
    rule_id = block.get("id", "")
    if not rule_id:
        raise RulePackError(f"line {lineno}: rule block is missing 'id'")

    def fail(msg: str):
        raise RulePackError(f"line {lineno}: rule {rule_id!r}: {msg}")

    for required in ("title", "severity", "matcher"):
        if required not in block:
            fail(f"missing required key {required!r}")
    try:
        severity = Severity.parse(block["severity"])
    except ValueError as exc:
        fail(str(exc))
    matcher = block["matcher"]
    if matcher not in MATCHER_KINDS:
        fail(f"unknown matcher kind {matcher!r}")
    if matcher == "paired_resource":
        if not block.get("alloc_pattern") or not block.get("release_pattern"):
            fail("paired_resource needs alloc_pattern and release_pattern")
        patterns = (("alloc_pattern", block["alloc_pattern"]), ("release_pattern", block["release_pattern"]))
    else:
        if not block.get("pattern"):
            fail("missing required key 'pattern'")
        patterns = (("pattern", block["pattern"]),)
    for name, pat in patterns:
        try:
            re.compile(pat)
        except re.error as exc:
            fail(f"{name} does not compile: {exc}")
    violation = block.get("violation", "missing_release")
    if violation not in PAIRED_VIOLATIONS:
        fail(f"unknown violation {violation!r}")
    scope = block.get("scope", "any")
    if scope not in RULE_SCOPES:
        fail(f"unknown scope {scope!r}")
    languages = tuple(
        part.strip() for part in block.get("languages", "any").split(",") if part.strip()
    ) or ("any",)
    return Rule(
        id=rule_id,
        title=block["title"],
        severity=severity,
        matcher=matcher,
        pattern=block.get("pattern", ""),
        alloc_pattern=block.get("alloc_pattern", ""),
        release_pattern=block.get("release_pattern", ""),
        violation=violation,
        languages=languages,
        scope=scope,
        description=block.get("description", ""),
        remediation=block.get("remediation", ""),
    )


def load_rulepack(path: str | Path) -> RulePack:
    """Parse a rule file; errors name the offending rule id and line."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_rulepack(text, default_name=Path(path).stem)


def parse_rulepack(text: str, default_name: str = "pack") -> RulePack:
    blocks = _parse_blocks(text)
    name = default_name
    version = "0"
    rules: list[Rule] = []
    seen: dict[str, int] = {}
    for lineno, block in blocks:
        if "pack" in block and "id" not in block:
            name = block["pack"]
            version = block.get("version", version)
            continue
        rule = _rule_from_block(lineno, block)
        if rule.id in seen:
            raise RulePackError(
                f"line {lineno}: duplicate rule id {rule.id!r} (first defined at line {seen[rule.id]})"
            )
        seen[rule.id] = lineno
        rules.append(rule)
    return RulePack(name=name, version=version, rules=tuple(rules))


def serialize_rulepack(pack: RulePack) -> str:
    """Canonical rule-file rendering; load(serialize(load(f))) round-trips."""
    out = [f"pack: {pack.name}", f"version: {pack.version}", ""]
    for rule in pack.rules:
        out.append(f"id: {rule.id}")
        out.append(f"title: {rule.title}")
        out.append(f"severity: {rule.severity.key}")
        out.append(f"matcher: {rule.matcher}")
        if rule.matcher == "paired_resource":
            out.append(f"alloc_pattern: {rule.alloc_pattern}")
            out.append(f"release_pattern: {rule.release_pattern}")
            out.append(f"violation: {rule.violation}")
        else:
            out.append(f"pattern: {rule.pattern}")
        if rule.languages != ("any",):
            out.append(f"languages: {', '.join(rule.languages)}")
        if rule.scope != "any":
            out.append(f"scope: {rule.scope}")
        if rule.description:
            out.append(f"description: {rule.description}")
        if rule.remediation:
            out.append(f"remediation: {rule.remediation}")
        out.append("")
    return "\n".join(out)


# --- built-in pack ----------------------------------------------------------

_C_ALLOC = r"\b([A-Za-z_]\w*)\s*=\s*(?:\([^)]*\)\s*)?malloc\s*\("
_C_RELEASE = r"\bfree\s*\(\s*([A-Za-z_]\w*)\s*\)"


def builtin_rules() -> RulePack:
    """The built-in rule pack covering the documented vulnerability classes."""
    rules = (
        Rule(
            id="cpp.unsafe-memcpy",
            title="Unsafe Use of memcpy Allows Buffer Overflow",
            severity=Severity.HIGH,
            matcher="pattern",
            pattern=r"\bmemcpy\s*\(",
            languages=("C", "C++"),
            description="A memcpy size limit larger than the destination buffer allows a buffer overflow.",
            remediation="Check the size of both the buffer and the source to ensure alignment.",
        ),
        Rule(
            id="cpp.unsafe-strcpy",
            title="Unsafe Use of strcpy Allows Buffer Overflow",
            severity=Severity.HIGH,
            matcher="pattern",
            pattern=r"\bstrcpy\s*\(",
            languages=("C", "C++"),
            description="strcpy performs no bounds checking and can overflow the destination buffer.",
            remediation="Use a bounded copy such as strncpy or snprintf with an explicit size.",
        ),
        Rule(
            id="c.malloc-no-free",
            title="Memory Allocated With malloc Is Never Freed",
            severity=Severity.HIGH,
            matcher="paired_resource",
            alloc_pattern=_C_ALLOC,
            release_pattern=_C_RELEASE,
            violation="missing_release",
            languages=("C", "C++"),
            description="A buffer allocated with malloc has no matching free call in the enclosing scope.",
            remediation="Free the allocation on every exit path, or document the ownership transfer.",
        ),
        Rule(
            id="c.double-free",
            title="Multiple Frees of the Same Allocation",
            severity=Severity.HIGH,
            matcher="paired_resource",
            alloc_pattern=_C_ALLOC,
            release_pattern=_C_RELEASE,
            violation="double_release",
            languages=("C", "C++"),
            description="The same pointer is passed to free more than once without an intervening rebinding.",
            remediation="Null the pointer after freeing it and guard repeated release paths.",
        ),
        Rule(
            id="cs.hardcoded-password",
            title="Potentially Unsafe Code - Appears to Contain Hard-Coded Password",
            severity=Severity.MEDIUM,
            matcher="pattern",
            pattern=r'(?i)\b\w*(?:passw(?:or)?d|secret|pwd)\w*\s*=\s*@?"[^"]+"',
            languages=("C#",),
            description=(
                "The code may contain a hard-coded password which an attacker could obtain "
                "from the source or by dis-assembling the executable."
            ),
            remediation="Move the credential to a secret store or protected configuration.",
        ),
        Rule(
            id="cs.case-insensitive-password",
            title="Potentially Unsafe Code - Unsafe Password Management",
            severity=Severity.MEDIUM,
            matcher="pattern",
            pattern=r"(?i)\b\w*passw(?:or)?d\w*\b[^\"\n]*\.To(?:Upper|Lower)(?:Invariant)?\s*\(",
            languages=("C#",),
            description=(
                "The application appears to handle passwords in a case-insensitive manner, "
                "which greatly increases the likelihood of successful brute-force attacks."
            ),
            remediation="Compare passwords case-sensitively and hash them before comparison.",
        ),
        Rule(
            id="cs.insecure-sensitive-storage",
            title="Potentially Unsafe Code - Insecure Storage of Sensitive Information",
            severity=Severity.MEDIUM,
            matcher="pattern",
            pattern=r"(?i)\b(?:string|byte\s*\[\s*\])\s+\w*(?:key|passw(?:or)?d|secret|pwd)\w*\s*=\s*null\b",
            languages=("C#",),
            description=(
                "Standard strings or byte arrays are used to store sensitive transient data "
                "such as passwords or private keys instead of a secure container."
            ),
            remediation="Use SecureString or an equivalent protected container for secrets.",
        ),
        Rule(
            id="cs.debug-enabled",
            title="Potentially Unsafe Code - .NET Debugging Enabled",
            severity=Severity.MEDIUM,
            matcher="config_check",
            pattern=r'(?i)<compilation[^>]*\bdebug\s*=\s*"true"',
            languages=("Config",),
            description="Production configuration enables .NET debugging, opening an unnecessary attack vector.",
            remediation='Set debug="false" in deployed configuration.',
        ),
        Rule(
            id="cs.potential-xss",
            title="Potentially Unsafe Code - Potential XSS",
            severity=Severity.MEDIUM,
            matcher="pattern",
            pattern=r"(?i)\bResponse\.Write\s*\(",
            languages=("C#",),
            description="Writing dynamic content directly to the response can allow cross-site scripting.",
            remediation="Encode output with an HTML encoder before writing it to the response.",
        ),
        Rule(
            id="cs.thread-lock-perf",
            title="Potentially Unsafe Code - Thread Locks - Possible Performance Impact",
            severity=Severity.LOW,
            matcher="pattern",
            pattern=r"\block\s*\(",
            languages=("C#",),
            description="Broad lock statements can serialize hot paths and degrade throughput.",
            remediation="Keep lock bodies minimal and prefer finer-grained synchronization.",
        ),
        Rule(
            id="cs.loadxml",
            title="Potentially Unsafe Code - LoadXml",
            severity=Severity.STANDARD,
            matcher="pattern",
            pattern=r"\.LoadXml\s*\(",
            languages=("C#",),
            description="LoadXml on untrusted input can enable XML external entity or injection issues.",
            remediation="Parse XML with a hardened reader and disable DTD processing.",
        ),
        Rule(
            id="cs.toctou",
            title="Potentially Unsafe Code - Potential TOCTOU (Time Of Check, Time Of Use) Vulnerability",
            severity=Severity.STANDARD,
            matcher="pattern",
            pattern=r"(?i)\bFile\.Exists\s*\(",
            languages=("C#",),
            description="Checking a file before using it races against concurrent filesystem changes.",
            remediation="Open the file directly and handle the failure instead of checking first.",
        ),
        Rule(
            id="cs.url-from-variable",
            title="Potentially Unsafe Code - URL Request Gets Path from Variable",
            severity=Severity.STANDARD,
            matcher="pattern",
            pattern=r"(?i)\bWebRequest\.Create\s*\(\s*[A-Za-z_]\w*\s*[),]",
            languages=("C#",),
            description="Building a request from a variable URL can allow request forgery if the value is attacker-controlled.",
            remediation="Validate the URL against an allow-list before issuing the request.",
        ),
        Rule(
            id="any.suspicious-comment",
            title="Comment Indicates Potentially Unfinished Code",
            severity=Severity.SUSPICIOUS_COMMENT,
            matcher="pattern",
            pattern=r"\b(?:TODO|FIXME|HACK|XXX|BUG)\b",
            languages=("any",),
            scope="comment",
            description="A comment marker suggests unfinished or problematic code worth manual review.",
            remediation="Resolve or remove the marker, or record the follow-up in the issue tracker.",
        ),
    )
    return RulePack(name="builtin", version="1.0.0", rules=rules)
