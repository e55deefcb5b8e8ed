"""Warning records, their persistence, and per-term timeline analytics.

A warning is the engine's primary output: a newly discovered term, how
often the experts mentioned it in the window just closed, how often it has
ever appeared in the darkweb/deepweb corpus, sample corpus posts, and the
threat-context terms it co-occurred with. The same term alerting again in
later windows is intentional: repeated warnings track how attention around
a threat evolves.

Wire format: one JSON object per line with keys ``id``, ``generated_at``
(RFC-3339), ``term``, ``twitter_frequency``, ``darkweb_frequency``,
``darkweb_posts`` (array of ``{post_id, timestamp, excerpt}``), and
``context_terms`` (sorted array).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import IO, Iterable, Iterator

from .corpus import CorpusIndex, CorpusMention
from .errors import DuplicateIdError, RecordParseError
from .filters import CandidateTerm
from .ingest import format_rfc3339, parse_timestamp

#: A term must be mentioned by at least this many posts in a window to alert.
DEFAULT_FREQUENCY_THRESHOLD = 2

DEFAULT_EXCERPT_LIMIT = 10


@dataclass(frozen=True)
class ThreatWarning:
    """One emitted alert. Named ThreatWarning to avoid the builtin Warning."""

    id: str
    generated_at: datetime
    term: str
    twitter_frequency: int
    darkweb_frequency: int
    darkweb_posts: tuple[CorpusMention, ...]
    context_terms: frozenset[str]


@dataclass(frozen=True)
class TimelineEntry:
    """Daily aggregate of a term's warnings."""

    bucket_start: date
    warning_count: int
    twitter_mentions: int
    darkweb_mentions: int


class WarningStore:
    """Append-only warning sequence ordered by generation time."""

    def __init__(self) -> None:
        self._warnings: list[ThreatWarning] = []
        self._ids: set[str] = set()

    def append(self, warning: ThreatWarning) -> None:
        if warning.id in self._ids:
            raise DuplicateIdError(f"warning id already stored: {warning.id!r}")
        if self._warnings and warning.generated_at < self._warnings[-1].generated_at:
            raise ValueError(
                f"warnings must be appended in generated_at order; "
                f"{warning.id!r} precedes the last stored warning"
            )
        self._warnings.append(warning)
        self._ids.add(warning.id)

    def extend(self, warnings: Iterable[ThreatWarning]) -> None:
        for warning in warnings:
            self.append(warning)

    def __len__(self) -> int:
        return len(self._warnings)

    def __iter__(self) -> Iterator[ThreatWarning]:
        return iter(self._warnings)

    def for_term(self, term: str) -> list[ThreatWarning]:
        return [w for w in self._warnings if w.term == term]

    def terms(self) -> set[str]:
        return {w.term for w in self._warnings}


def warning_id(term: str, window_start: datetime) -> str:
    """Stable id: identical inputs replay to identical ids."""
    digest = hashlib.sha256(
        f"{term}|{format_rfc3339(window_start)}".encode("utf-8")
    ).hexdigest()
    return digest[:16]


def generate_warnings(
    candidates: Iterable[CandidateTerm],
    index: CorpusIndex,
    generated_at: datetime,
    excerpt_limit: int = DEFAULT_EXCERPT_LIMIT,
    threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
) -> list[ThreatWarning]:
    """Turn a window's candidates into warnings.

    Candidates below the frequency threshold are suppressed. Corpus lookups
    are bounded by ``generated_at`` (the window end), so replayed warnings
    never cite posts from their own future.
    """
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    warnings: list[ThreatWarning] = []
    for candidate in sorted(candidates, key=lambda c: c.term):
        if candidate.tweet_frequency < threshold:
            continue
        mentions = index.mention_posts(candidate.term, generated_at, excerpt_limit)
        warnings.append(
            ThreatWarning(
                id=warning_id(candidate.term, candidate.window_start),
                generated_at=generated_at,
                term=candidate.term,
                twitter_frequency=candidate.tweet_frequency,
                darkweb_frequency=index.mention_count(candidate.term, generated_at),
                darkweb_posts=tuple(mentions),
                context_terms=frozenset(candidate.context_terms),
            )
        )
    return warnings


def timeline(store: WarningStore, term: str) -> list[TimelineEntry]:
    """Daily warning counts for a term, zero-filled between first and last day.

    ``twitter_mentions`` sums the day's window frequencies;
    ``darkweb_mentions`` takes the day's highest cumulative corpus count
    (cumulative values must not be summed).
    """
    term_warnings = store.for_term(term)
    if not term_warnings:
        return []
    by_day: dict[date, list[ThreatWarning]] = {}
    for warning in term_warnings:
        by_day.setdefault(warning.generated_at.date(), []).append(warning)
    first = min(by_day)
    last = max(by_day)
    entries: list[TimelineEntry] = []
    day = first
    while day <= last:
        bucket = by_day.get(day, [])
        entries.append(
            TimelineEntry(
                bucket_start=day,
                warning_count=len(bucket),
                twitter_mentions=sum(w.twitter_frequency for w in bucket),
                darkweb_mentions=max((w.darkweb_frequency for w in bucket), default=0),
            )
        )
        day += timedelta(days=1)
    return entries


def lead_time(store: WarningStore, term: str, event_time: datetime) -> timedelta | None:
    """Time between a term's earliest warning and a real-world event.

    None when the term never warned, or when its first warning came only
    after the event.
    """
    term_warnings = store.for_term(term)
    if not term_warnings:
        return None
    earliest = min(w.generated_at for w in term_warnings)
    if earliest > event_time:
        return None
    return event_time - earliest


def darkweb_onset(store: WarningStore, term: str) -> datetime | None:
    """When the corpus first corroborated a term: the earliest warning with
    a positive darkweb count, or None if the corpus never mentioned it."""
    for warning in store.for_term(term):
        if warning.darkweb_frequency > 0:
            return warning.generated_at
    return None


# --------------------------------------------------------------------------
# Wire format


def warning_to_record(warning: ThreatWarning) -> dict:
    return {
        "id": warning.id,
        "generated_at": format_rfc3339(warning.generated_at),
        "term": warning.term,
        "twitter_frequency": warning.twitter_frequency,
        "darkweb_frequency": warning.darkweb_frequency,
        "darkweb_posts": [
            {
                "post_id": m.post_id,
                "timestamp": format_rfc3339(m.timestamp),
                "excerpt": m.excerpt,
            }
            for m in warning.darkweb_posts
        ],
        "context_terms": sorted(warning.context_terms),
    }


def warning_from_record(record: dict, line: int = 0) -> ThreatWarning:
    try:
        return ThreatWarning(
            id=record["id"],
            generated_at=parse_timestamp(record["generated_at"]),
            term=record["term"],
            twitter_frequency=int(record["twitter_frequency"]),
            darkweb_frequency=int(record["darkweb_frequency"]),
            darkweb_posts=tuple(
                CorpusMention(
                    post_id=m["post_id"],
                    timestamp=parse_timestamp(m["timestamp"]),
                    excerpt=m["excerpt"],
                )
                for m in record["darkweb_posts"]
            ),
            context_terms=frozenset(record["context_terms"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordParseError(f"bad warning record: {exc}", line) from None


def warning_to_line(warning: ThreatWarning) -> str:
    """Serialize one warning to its canonical single-line form."""
    return json.dumps(warning_to_record(warning), separators=(",", ":"))


def write_warnings(warnings: Iterable[ThreatWarning], sink: IO[str]) -> int:
    """Write warnings as line-delimited records; returns how many were written."""
    count = 0
    for warning in warnings:
        sink.write(warning_to_line(warning) + "\n")
        count += 1
    return count


def read_warnings(source: IO[str]) -> WarningStore:
    """Load a warning file back into a store."""
    store = WarningStore()
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordParseError(f"invalid JSON: {exc.msg}", lineno) from None
        store.append(warning_from_record(record, lineno))
    return store
