"""Corpus ingestion: inventory a codebase snapshot and classify every line
as code, comment, or blank."""

from __future__ import annotations

import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from vulnscan.languages import LanguageProfile, language_for_extension, profile_for

_BINARY_SNIFF_BYTES = 8192


class CorpusError(Exception):
    """Fatal configuration problem while acquiring a corpus."""


@dataclass(frozen=True)
class SourceFile:
    path: str  # relative to corpus root, posix separators
    language: str
    physical_lines: int
    code_lines: int
    comment_lines: int
    blank_lines: int
    digest: str

    def __post_init__(self):
        total = self.code_lines + self.comment_lines + self.blank_lines
        if total != self.physical_lines:
            raise ValueError(f"{self.path}: line classes sum to {total}, expected {self.physical_lines}")


@dataclass(frozen=True)
class LanguageTotals:
    files: int = 0
    physical_lines: int = 0
    code_lines: int = 0
    comment_lines: int = 0
    blank_lines: int = 0


@dataclass(frozen=True)
class CorpusInventory:
    root: str
    files: tuple[SourceFile, ...]
    totals: dict[str, LanguageTotals]
    scanned_at: str
    warnings: tuple[str, ...] = ()

    @property
    def file_count(self) -> int:
        return len(self.files)

    @property
    def physical_lines(self) -> int:
        return sum(f.physical_lines for f in self.files)

    @property
    def code_lines(self) -> int:
        return sum(f.code_lines for f in self.files)

    @property
    def comment_lines(self) -> int:
        return sum(f.comment_lines for f in self.files)

    @property
    def blank_lines(self) -> int:
        return sum(f.blank_lines for f in self.files)


@dataclass
class ClassifiedSource:
    classes: list[str]  # per line: "code" | "comment" | "blank"
    code_lines: int
    comment_lines: int
    blank_lines: int
    comment_text: list[str]  # per line: text that sits inside comment regions
    warnings: list[str] = field(default_factory=list)

    @property
    def physical_lines(self) -> int:
        return len(self.classes)


def detect_language(path: str) -> str:
    """Language for a path by extension, case-insensitive; 'unknown' otherwise."""
    suffix = Path(path).suffix
    return language_for_extension(suffix) if suffix else "unknown"


def classify_lines(content: str, profile: LanguageProfile) -> ClassifiedSource:
    """Single-pass state machine over `content`.

    A line is blank when whitespace-only, comment when its only non-blank
    content lies in comment regions, and code otherwise.  Comment markers
    inside string literals do not open comments.  An unterminated block
    comment classifies the remaining lines as comment and records a warning.
    """
    NORMAL, STRING, LINE_COMMENT, BLOCK_COMMENT = 0, 1, 2, 3
    state = NORMAL
    string_delim = ""
    block_close = ""

    classes: list[str] = []
    comment_texts: list[str] = []
    warnings: list[str] = []

    has_code = False
    has_comment = False
    line_comment_chars: list[str] = []

    def end_line():
        nonlocal has_code, has_comment, line_comment_chars, state
        if has_code:
            classes.append("code")
        elif has_comment:
            classes.append("comment")
        else:
            classes.append("blank")
        comment_texts.append("".join(line_comment_chars))
        has_code = False
        has_comment = False
        line_comment_chars = []
        if state in (STRING, LINE_COMMENT):
            state = NORMAL

    i = 0
    n = len(content)
    while i < n:
        ch = content[i]
        if ch == "\n":
            end_line()
            i += 1
            continue

        if state == NORMAL:
            matched = False
            for open_marker, close_marker in profile.block_comment_pairs:
                if content.startswith(open_marker, i):
                    state = BLOCK_COMMENT
                    block_close = close_marker
                    has_comment = True
                    i += len(open_marker)
                    matched = True
                    break
            if matched:
                continue
            for marker in profile.line_comment_markers:
                if content.startswith(marker, i):
                    state = LINE_COMMENT
                    has_comment = True
                    i += len(marker)
                    matched = True
                    break
            if matched:
                continue
            if ch in profile.string_delimiters:
                state = STRING
                string_delim = ch
                has_code = True
                i += 1
                continue
            if not ch.isspace():
                has_code = True
            i += 1
        elif state == STRING:
            if ch == "\\" and i + 1 < n and content[i + 1] != "\n":
                has_code = True
                i += 2
                continue
            if ch == string_delim:
                state = NORMAL
            elif not ch.isspace():
                has_code = True
            i += 1
        elif state == LINE_COMMENT:
            if not ch.isspace():
                has_comment = True
            line_comment_chars.append(ch)
            i += 1
        else:  # BLOCK_COMMENT
            if content.startswith(block_close, i):
                state = NORMAL
                has_comment = True
                i += len(block_close)
                continue
            if not ch.isspace():
                has_comment = True
            line_comment_chars.append(ch)
            i += 1

    if n and not content.endswith("\n"):
        end_line()
    if state == BLOCK_COMMENT:
        warnings.append("unterminated block comment at end of file")

    return ClassifiedSource(
        classes=classes,
        code_lines=classes.count("code"),
        comment_lines=classes.count("comment"),
        blank_lines=classes.count("blank"),
        comment_text=comment_texts,
        warnings=warnings,
    )


def glob_to_regex(pattern: str) -> re.Pattern[str]:
    """Translate a glob with `*`, `**`, `?` into a regex over posix relpaths."""
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "*":
            if pattern.startswith("**/", i):
                out.append(r"(?:[^/]+/)*")
                i += 3
            elif pattern.startswith("**", i):
                out.append(r".*")
                i += 2
            else:
                out.append(r"[^/]*")
                i += 1
        elif ch == "?":
            out.append(r"[^/]")
            i += 1
        else:
            out.append(re.escape(ch))
            i += 1
    return re.compile("".join(out) + r"\Z")


def _is_binary(path: Path) -> bool:
    with path.open("rb") as fh:
        return b"\x00" in fh.read(_BINARY_SNIFF_BYTES)


def read_text(path: Path) -> str:
    """Decode file content as UTF-8, replacing invalid byte sequences."""
    return path.read_bytes().decode("utf-8", errors="replace")


def _inventory_one(root: Path, rel: str) -> SourceFile:
    abs_path = root / rel
    data = abs_path.read_bytes()
    language = detect_language(rel)
    classified = classify_lines(data.decode("utf-8", errors="replace"), profile_for(language))
    return SourceFile(
        path=rel,
        language=language,
        physical_lines=classified.physical_lines,
        code_lines=classified.code_lines,
        comment_lines=classified.comment_lines,
        blank_lines=classified.blank_lines,
        digest=hashlib.sha256(data).hexdigest(),
    )


def ingest(
    root: str | Path,
    include_globs: list[str] | None = None,
    exclude_globs: list[str] | None = None,
    workers: int | None = None,
) -> CorpusInventory:
    """Build a read-only inventory of every non-excluded text file under `root`.

    Binary files (NUL byte within the first 8 KiB) are skipped silently;
    unreadable files become per-file warnings and the ingest continues.
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise CorpusError(f"corpus root does not exist or is not a directory: {root}")
    root_path = root_path.resolve()

    includes = [glob_to_regex(g) for g in (include_globs or [])]
    excludes = [glob_to_regex(g) for g in (exclude_globs or [])]

    candidates: list[str] = []
    warnings: list[str] = []
    for p in sorted(root_path.rglob("*")):
        if not p.is_file() or p.is_symlink():
            continue
        rel = p.relative_to(root_path).as_posix()
        if includes and not any(rx.match(rel) for rx in includes):
            continue
        if any(rx.match(rel) for rx in excludes):
            continue
        try:
            if _is_binary(p):
                continue
        except OSError as exc:
            warnings.append(f"{rel}: unreadable ({exc.__class__.__name__})")
            continue
        candidates.append(rel)

    files: list[SourceFile] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda rel: _ingest_safe(root_path, rel), candidates)
        for rel, source_file, error in results:
            if error is not None:
                warnings.append(f"{rel}: unreadable ({error})")
            else:
                files.append(source_file)

    files.sort(key=lambda f: f.path)

    totals: dict[str, LanguageTotals] = {}
    for f in files:
        t = totals.get(f.language, LanguageTotals())
        totals[f.language] = LanguageTotals(
            files=t.files + 1,
            physical_lines=t.physical_lines + f.physical_lines,
            code_lines=t.code_lines + f.code_lines,
            comment_lines=t.comment_lines + f.comment_lines,
            blank_lines=t.blank_lines + f.blank_lines,
        )

    return CorpusInventory(
        root=str(root_path),
        files=tuple(files),
        totals=dict(sorted(totals.items())),
        scanned_at=datetime.now(timezone.utc).isoformat(),
        warnings=tuple(warnings),
    )


def _ingest_safe(root: Path, rel: str):
    try:
        return rel, _inventory_one(root, rel), None
    except OSError as exc:
        return rel, None, exc.__class__.__name__
