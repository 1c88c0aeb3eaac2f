"""Seeded random source-file generator mixing code tokens, line comments,
block comments, and string literals, for classifier oracle runs."""

from __future__ import annotations

import random

from vulnscan.languages import LanguageProfile

_CODE_TOKENS = ["int x;", "foo(bar)", "x += 1", "return y", "{", "}", "a*b/c", "call();"]
_COMMENT_WORDS = ["note", "TODO later", "see issue", "/* nested */", "tricky // bit", ""]
_STRING_BODIES = ["hello", "/* not a comment */", "// neither", "a\\\"b", "", "x -- y"]


def random_source(rng: random.Random, profile: LanguageProfile, max_lines: int = 30) -> str:
    parts: list[str] = []
    for _ in range(rng.randrange(max_lines)):
        roll = rng.random()
        if roll < 0.15:
            parts.append(rng.choice(["", "   ", "\t"]))
        elif roll < 0.45:
            line = rng.choice(_CODE_TOKENS)
            if profile.string_delimiters and rng.random() < 0.4:
                d = rng.choice(profile.string_delimiters)
                body = rng.choice(_STRING_BODIES)
                line += f" s = {d}{body}{d};"
            if profile.line_comment_markers and rng.random() < 0.3:
                line += f" {rng.choice(profile.line_comment_markers)} {rng.choice(_COMMENT_WORDS)}"
            parts.append(line)
        elif roll < 0.6 and profile.line_comment_markers:
            parts.append(f"{rng.choice(profile.line_comment_markers)} {rng.choice(_COMMENT_WORDS)}")
        elif roll < 0.85 and profile.block_comment_pairs:
            open_marker, close_marker = rng.choice(profile.block_comment_pairs)
            span = rng.randrange(1, 4)
            body = "\n".join(rng.choice(_COMMENT_WORDS) for _ in range(span))
            block = f"{open_marker} {body}"
            if rng.random() < 0.9:  # sometimes leave unterminated
                block += f" {close_marker}"
            if rng.random() < 0.5:
                block += " trailing();"
            parts.append(block)
        else:
            parts.append(rng.choice(_CODE_TOKENS))
    text = "\n".join(parts)
    if text and rng.random() < 0.8:
        text += "\n"
    return text
