"""Text normalization, tokenization, and per-window term aggregation.

Normalization reduces a post to lowercase letter-only tokens: URLs and
author handles disappear, hashtags keep their word, and every digit or
symbol becomes a token break. Counting is per post: a post mentioning a
term three times contributes one to that term's window frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .ingest import WindowBatch

_URL_PREFIXES = ("http://", "https://", "www.")


def normalize(text: str) -> str:
    """Normalize raw post text to lowercase letters separated by single spaces.

    Steps, in order: lowercase; drop whole URL tokens (``http://``,
    ``https://``, ``www.`` prefixes); drop whole ``@handle`` tokens; strip
    ``#`` from hashtag tokens; replace every remaining non-letter,
    non-whitespace character with a space; collapse whitespace runs.
    Idempotent by construction.
    """
    if not text:
        return ""
    kept: list[str] = []
    for token in text.lower().split():
        if token.startswith(_URL_PREFIXES) or token.startswith("@"):
            continue
        if token.startswith("#"):
            token = token.lstrip("#")
            if not token:
                continue
        kept.append(token)
    cleaned = "".join(
        c if c.isalpha() or c.isspace() else " " for c in " ".join(kept)
    )
    return " ".join(cleaned.split())


def tokenize(normalized: str) -> list[str]:
    """Split normalized text on spaces; never yields empty tokens."""
    return normalized.split()


def term_set(text: str) -> set[str]:
    """Distinct normalized tokens of a raw text."""
    return set(tokenize(normalize(text)))


@dataclass
class TermCounts:
    """Per-term post frequencies for one window.

    ``counts[t]`` is the number of posts in the window whose token set
    contains ``t``; ``supporters[t]`` holds those posts' ids, so
    ``counts[t] == len(supporters[t])`` always.
    """

    window_start: datetime
    counts: dict[str, int] = field(default_factory=dict)
    supporters: dict[str, set[str]] = field(default_factory=dict)


def aggregate_window(batch: WindowBatch) -> TermCounts:
    """Tally how many posts in the batch mention each term at least once."""
    counts: dict[str, int] = {}
    supporters: dict[str, set[str]] = {}
    for post in batch.posts:
        for term in term_set(post.text):
            counts[term] = counts.get(term, 0) + 1
            supporters.setdefault(term, set()).add(post.id)
    return TermCounts(window_start=batch.window_start, counts=counts, supporters=supporters)
