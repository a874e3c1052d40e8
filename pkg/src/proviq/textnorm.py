"""Text normalization shared by table lookups, voting and answer matching."""

from __future__ import annotations

import string

_TERMINAL = ".!?,;:"
_PUNCT_TO_SPACE = str.maketrans({c: " " for c in string.punctuation})


def normalize_answer(s: str) -> str:
    """Lowercase, trim, collapse whitespace, strip terminal punctuation."""
    s = " ".join(s.strip().lower().split())
    while s and s[-1] in _TERMINAL:
        s = s[:-1].rstrip()
    return s


def tokenize(s: str) -> list[str]:
    """Lowercase, replace punctuation with spaces, split on whitespace."""
    return s.lower().translate(_PUNCT_TO_SPACE).split()


def phrase_key(s: str) -> str:
    """Canonical token-joined form used for exact-match comparisons."""
    return " ".join(tokenize(s))
