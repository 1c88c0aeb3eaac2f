"""Language profiles: extensions plus the lexical syntax needed to split
lines into code / comment / blank."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LanguageProfile:
    name: str
    extensions: tuple[str, ...]
    line_comment_markers: tuple[str, ...] = ()
    block_comment_pairs: tuple[tuple[str, str], ...] = ()
    string_delimiters: tuple[str, ...] = ()

    def __post_init__(self):
        for open_marker, close_marker in self.block_comment_pairs:
            if not open_marker or not close_marker:
                raise ValueError(f"{self.name}: block comment markers must be non-empty")


_C_STYLE = dict(
    line_comment_markers=("//",),
    block_comment_pairs=(("/*", "*/"),),
    string_delimiters=('"', "'"),
)

# Built-in profiles cover C, C++, C#, Java, SQL and config files, plus a
# generic C-style fallback used for files of unknown language.
BUILTIN_PROFILES: tuple[LanguageProfile, ...] = (
    LanguageProfile("C", (".c", ".h"), **_C_STYLE),
    LanguageProfile("C++", (".cc", ".cpp", ".cxx", ".hpp", ".hh", ".hxx", ".c++"), **_C_STYLE),
    LanguageProfile("C#", (".cs",), **_C_STYLE),
    LanguageProfile("Java", (".java",), **_C_STYLE),
    LanguageProfile(
        "SQL",
        (".sql",),
        line_comment_markers=("--",),
        block_comment_pairs=(("/*", "*/"),),
        string_delimiters=("'",),
    ),
    LanguageProfile(
        "Config",
        (".config", ".xml", ".ini", ".cfg", ".conf", ".properties"),
        line_comment_markers=("#", ";"),
        block_comment_pairs=(("<!--", "-->"),),
        string_delimiters=('"',),
    ),
)

GENERIC_PROFILE = LanguageProfile("unknown", (), **_C_STYLE)

_BY_NAME: dict[str, LanguageProfile] = {p.name: p for p in BUILTIN_PROFILES}

_BY_EXTENSION: dict[str, str] = {}
for _profile in BUILTIN_PROFILES:
    for _ext in _profile.extensions:
        if _ext in _BY_EXTENSION:
            raise RuntimeError(f"duplicate extension registration: {_ext}")
        _BY_EXTENSION[_ext] = _profile.name


def registered_languages() -> list[str]:
    return [p.name for p in BUILTIN_PROFILES]


def language_for_extension(ext: str) -> str:
    """Map a file extension (case-insensitive) to a language name, or 'unknown'."""
    return _BY_EXTENSION.get(ext.lower(), "unknown")


def profile_for(language: str) -> LanguageProfile:
    """Profile for a language name; unknown languages get the generic C-style profile."""
    return _BY_NAME.get(language, GENERIC_PROFILE)
