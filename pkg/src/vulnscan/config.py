"""Config file handling. Uses the same plain-text `key: value` block format
as rule files; one block of scanner settings."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from vulnscan.rules import RulePackError, Severity, _parse_blocks

_LIST_KEYS = ("include", "exclude", "rulepacks", "languages")
_KNOWN_KEYS = set(_LIST_KEYS) | {"density", "fail_level", "out", "triage_store", "non_comment_only"}


class ConfigError(Exception):
    pass


@dataclass
class Config:
    include: list[str] = field(default_factory=list)
    exclude: list[str] = field(default_factory=list)
    rulepacks: list[str] = field(default_factory=list)
    languages: list[str] = field(default_factory=list)
    density: str = "NCLOC"
    fail_level: str | None = None
    out: str | None = None
    triage_store: str | None = None
    non_comment_only: bool = False


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        blocks = _parse_blocks(text)
    except RulePackError as exc:
        raise ConfigError(str(exc)) from exc

    cfg = Config()
    for lineno, block in blocks:
        for key, value in block.items():
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
            if key in _LIST_KEYS:
                setattr(cfg, key, [p.strip() for p in value.split(",") if p.strip()])
            elif key == "density":
                if value not in ("LOC", "NCLOC"):
                    raise ConfigError(f"line {lineno}: density must be LOC or NCLOC")
                cfg.density = value
            elif key == "fail_level":
                Severity.parse(value)  # validate early
                cfg.fail_level = value
            elif key == "non_comment_only":
                cfg.non_comment_only = value.lower() in ("1", "true", "yes")
            else:
                setattr(cfg, key, value)
    return cfg
