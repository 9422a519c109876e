"""Shared tokenizer for tables, reports and metric inputs.

Whitespace chunks are split further so that punctuation becomes separate
tokens while numeric surfaces stay intact: ``"0.65"`` is one token,
``"ng/mL"`` becomes ``["ng", "/", "mL"]``, and asterisk runs such as
``"**"`` survive as a single markup token.  Case is preserved.
"""

from __future__ import annotations

import re

# Order matters: decimal numbers before bare word chars, asterisk runs as
# one unit so emphasis markup survives tokenization.
_TOKEN_RE = re.compile(r"\d+\.\d+|\w+|\*+|[^\w\s*]")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into tokens, detaching punctuation from words."""
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokenize and return ``(token, start, end)`` character spans."""
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def detokenize(tokens: list[str]) -> str:
    """Join tokens with single spaces (normal form used for lookups)."""
    return " ".join(tokens)


def surface_pattern(surface: str) -> re.Pattern[str]:
    """Regex matching ``surface`` only where it is a whole token.

    Word characters may not touch either side, and a decimal continuation
    (``.`` followed by a digit, or digit followed by ``.``) blocks the
    match so ``"300"`` never matches inside ``"300.5"`` or ``"3.300"``.
    """
    return re.compile(
        r"(?<!\w)(?<!\d\.)" + re.escape(surface) + r"(?!\w)(?!\.\d)"
    )


def replace_token(text: str, surface: str, replacement: str) -> str:
    """Replace every whole-token occurrence of ``surface`` in ``text``."""
    return surface_pattern(surface).sub(replacement.replace("\\", "\\\\"), text)
