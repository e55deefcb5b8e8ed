"""Loading of dictionaries, expert lists, and post streams, plus time windowing.

File formats handled here:

* dictionary files: UTF-8 text, one term per line, ``#`` comments and blank
  lines ignored;
* expert lists: same line format, one author handle per line (a leading ``@``
  is tolerated and stripped);
* post files: UTF-8, one JSON object per line with required keys ``id``,
  ``source``, ``author``, ``timestamp`` (Unix seconds or RFC-3339 string) and
  ``text``, plus optional ``site`` and ``author_reputation``.
"""

from __future__ import annotations

import json
import time
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import BinaryIO, Callable, Iterable, Iterator

from .errors import (
    DictionaryFormatError,
    DuplicateIdError,
    EmptyDictionaryError,
    RecordParseError,
)


class Source(Enum):
    """Origin channel of a post."""

    EXPERT_FEED = "expert_feed"
    DARKWEB = "darkweb"
    DEEPWEB = "deepweb"
    BLOG = "blog"


class DictionaryRole(Enum):
    """What a dictionary is used for in the filtering chain."""

    COMMON_LANGUAGE = "common_language"
    STOPWORD = "stopword"
    TECHNICAL = "technical"
    THREAT = "threat"
    FOREIGN_LANGUAGE = "foreign_language"


#: Exclusion roles: membership in one of these removes a term from candidacy.
EXCLUSION_ROLES = frozenset(
    {
        DictionaryRole.COMMON_LANGUAGE,
        DictionaryRole.STOPWORD,
        DictionaryRole.TECHNICAL,
        DictionaryRole.FOREIGN_LANGUAGE,
    }
)

#: Roles holding ordinary-language vocabulary (as opposed to expert jargon).
LANGUAGE_ROLES = frozenset(
    {
        DictionaryRole.COMMON_LANGUAGE,
        DictionaryRole.STOPWORD,
        DictionaryRole.FOREIGN_LANGUAGE,
    }
)


@dataclass(frozen=True)
class SourcePost:
    """One timestamped text item from any monitored channel."""

    id: str
    source: Source
    author: str
    timestamp: datetime
    text: str
    site: str | None = None
    author_reputation: int | None = None


@dataclass(frozen=True)
class ExpertList:
    """Curated set of lowercase author handles whose posts drive discovery."""

    handles: frozenset[str]

    def __post_init__(self) -> None:
        if not self.handles:
            raise ValueError("expert list must not be empty")
        for handle in self.handles:
            if handle != handle.lower() or any(c.isspace() for c in handle) or not handle:
                raise ValueError(f"invalid expert handle: {handle!r}")

    def __contains__(self, author: str) -> bool:
        return author.lower() in self.handles


@dataclass(frozen=True)
class Dictionary:
    """A named set of lowercase terms with a filtering role."""

    name: str
    role: DictionaryRole
    terms: frozenset[str]

    def __post_init__(self) -> None:
        for term in self.terms:
            if not term or term != term.lower() or any(c.isspace() for c in term):
                raise ValueError(f"{self.name}: invalid dictionary term {term!r}")

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


@dataclass
class WindowBatch:
    """All posts falling inside one fixed-length time window.

    In the warning pipeline every post in a batch comes from the expert feed
    and a curated author; ``replay_windows`` itself partitions whatever posts
    it is given.
    """

    window_start: datetime
    window_length: timedelta = timedelta(minutes=60)
    posts: list[SourcePost] = field(default_factory=list)

    @property
    def window_end(self) -> datetime:
        return self.window_start + self.window_length


# --------------------------------------------------------------------------
# Timestamp handling

_UTC = timezone.utc


def parse_timestamp(value: int | float | str) -> datetime:
    """Parse a Unix-seconds integer or RFC-3339 string into a UTC instant.

    Fractional seconds are truncated; offsets are converted to UTC.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(int(value), tz=_UTC)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        parsed = datetime.fromisoformat(text)
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=_UTC)
        return parsed.astimezone(_UTC).replace(microsecond=0)
    raise ValueError(f"not a timestamp: {value!r}")


def format_rfc3339(instant: datetime) -> str:
    """Render a UTC instant as an RFC-3339 string with a ``Z`` suffix."""
    return instant.astimezone(_UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


# --------------------------------------------------------------------------
# Dictionary and expert-list loading


def _read_term_lines(stream: BinaryIO) -> Iterator[tuple[int, str]]:
    data = stream.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def load_dictionary(stream: BinaryIO, name: str, role: DictionaryRole) -> Dictionary:
    """Load a dictionary from a one-term-per-line UTF-8 stream.

    Lines are trimmed and lowercased; comments and blanks are skipped;
    duplicates collapse. Raises :class:`EmptyDictionaryError` when no terms
    remain and :class:`DictionaryFormatError` for terms containing whitespace.
    """
    terms: set[str] = set()
    for lineno, line in _read_term_lines(stream):
        term = line.lower()
        if any(c.isspace() for c in term):
            raise DictionaryFormatError(
                f"{name}: line {lineno}: term contains whitespace: {term!r}"
            )
        terms.add(term)
    if not terms:
        raise EmptyDictionaryError(f"{name}: no terms found")
    return Dictionary(name=name, role=role, terms=frozenset(terms))


def load_experts(stream: BinaryIO) -> ExpertList:
    """Load an expert list: one handle per line, lowercased, ``@`` stripped."""
    handles: set[str] = set()
    for lineno, line in _read_term_lines(stream):
        handle = line.lower().lstrip("@")
        if not handle or any(c.isspace() for c in handle):
            raise DictionaryFormatError(f"experts: line {lineno}: invalid handle {line!r}")
        handles.add(handle)
    if not handles:
        raise EmptyDictionaryError("experts: no handles found")
    return ExpertList(handles=frozenset(handles))


# --------------------------------------------------------------------------
# Post loading

_REQUIRED_POST_KEYS = ("id", "source", "author", "timestamp", "text")


def parse_post_record(record: dict, line: int = 0) -> SourcePost:
    """Build a :class:`SourcePost` from one wire-format record."""
    if not isinstance(record, dict):
        raise RecordParseError("record is not an object", line)
    for key in _REQUIRED_POST_KEYS:
        if key not in record:
            raise RecordParseError(f"missing required key {key!r}", line)
    try:
        source = Source(record["source"])
    except ValueError:
        raise RecordParseError(f"unknown source {record['source']!r}", line) from None
    try:
        timestamp = parse_timestamp(record["timestamp"])
    except ValueError as exc:
        raise RecordParseError(f"bad timestamp: {exc}", line) from None
    post_id = record["id"]
    author = record["author"]
    text = record["text"]
    if not isinstance(post_id, str) or not post_id:
        raise RecordParseError("id must be a non-empty string", line)
    if not isinstance(author, str) or not isinstance(text, str):
        raise RecordParseError("author and text must be strings", line)
    reputation = record.get("author_reputation")
    if reputation is not None and not isinstance(reputation, int):
        raise RecordParseError("author_reputation must be an integer", line)
    site = record.get("site")
    if site is not None and not isinstance(site, str):
        raise RecordParseError("site must be a string", line)
    return SourcePost(
        id=post_id,
        source=source,
        author=author,
        timestamp=timestamp,
        text=text,
        site=site,
        author_reputation=reputation,
    )


def post_to_record(post: SourcePost) -> dict:
    """Render a post back into its wire-format dict (epoch-second timestamp)."""
    record: dict = {
        "id": post.id,
        "source": post.source.value,
        "author": post.author,
        "timestamp": int(post.timestamp.timestamp()),
        "text": post.text,
    }
    if post.site is not None:
        record["site"] = post.site
    if post.author_reputation is not None:
        record["author_reputation"] = post.author_reputation
    return record


def iter_posts(stream: BinaryIO) -> Iterator[SourcePost]:
    """Yield posts from a line-delimited stream, enforcing unique ids."""
    seen: set[str] = set()
    data = stream.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordParseError(f"invalid JSON: {exc.msg}", lineno) from None
        post = parse_post_record(record, lineno)
        if post.id in seen:
            raise DuplicateIdError(f"line {lineno}: duplicate post id {post.id!r}")
        seen.add(post.id)
        yield post


def load_posts(stream: BinaryIO) -> list[SourcePost]:
    """Load all posts from a stream, in file order."""
    return list(iter_posts(stream))


# --------------------------------------------------------------------------
# Expert restriction and windowing


def filter_by_experts(posts: Iterable[SourcePost], experts: ExpertList) -> list[SourcePost]:
    """Keep expert-feed posts whose (lowercased) author is on the curated list."""
    return [
        post
        for post in posts
        if post.source is Source.EXPERT_FEED and post.author.lower() in experts.handles
    ]


def _floor_to_hour(instant: datetime) -> datetime:
    return instant.replace(minute=0, second=0, microsecond=0)


def replay_windows(
    posts: Iterable[SourcePost],
    window_length: timedelta = timedelta(minutes=60),
) -> Iterator[WindowBatch]:
    """Partition posts into consecutive fixed-length windows.

    The grid origin is the earliest post's timestamp truncated to the hour,
    so replays are deterministic regardless of when they run. Empty windows
    between the first and last posts are emitted, preserving timeline
    continuity downstream.
    """
    if window_length <= timedelta(0):
        raise ValueError(f"window_length must be positive, got {window_length!r}")
    ordered = sorted(posts, key=lambda p: p.timestamp)
    if not ordered:
        return
    origin = _floor_to_hour(ordered[0].timestamp)
    current = WindowBatch(window_start=origin, window_length=window_length)
    for post in ordered:
        while post.timestamp >= current.window_end:
            yield current
            current = WindowBatch(
                window_start=current.window_end, window_length=window_length
            )
        current.posts.append(post)
    yield current


def tail_windows(
    path: str,
    window_length: timedelta = timedelta(minutes=60),
    *,
    keep: Callable[[SourcePost], bool] | None = None,
    poll_seconds: float = 1.0,
    idle_timeout: float | None = None,
    stop: threading.Event | None = None,
) -> Iterator[WindowBatch]:
    """Follow an append-only post file, yielding windows as they complete.

    The same hour-aligned grid as :func:`replay_windows` applies, anchored to
    the first accepted post. A window is emitted once a later post proves it
    closed; the trailing partial window is flushed when the tail stops (via
    ``stop`` or after ``idle_timeout`` seconds without new data). Posts
    timestamped before the currently open window are dropped: the stream is
    expected to be roughly time-ordered. Records are newline-terminated; a
    trailing fragment without a newline counts as incomplete and is ignored.
    """
    if window_length <= timedelta(0):
        raise ValueError(f"window_length must be positive, got {window_length!r}")
    current: WindowBatch | None = None
    buffer = ""
    lineno = 0
    idle_since = time.monotonic()
    with open(path, "r", encoding="utf-8") as handle:
        while True:
            chunk = handle.read()
            if chunk:
                idle_since = time.monotonic()
                buffer += chunk
                lines = buffer.split("\n")
                buffer = lines.pop()  # possibly incomplete trailing line
                for raw in lines:
                    lineno += 1
                    line = raw.strip()
                    if not line:
                        continue
                    try:
                        record = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise RecordParseError(f"invalid JSON: {exc.msg}", lineno) from None
                    post = parse_post_record(record, lineno)
                    if keep is not None and not keep(post):
                        continue
                    if current is None:
                        current = WindowBatch(
                            window_start=_floor_to_hour(post.timestamp),
                            window_length=window_length,
                        )
                    if post.timestamp < current.window_start:
                        continue
                    while post.timestamp >= current.window_end:
                        yield current
                        current = WindowBatch(
                            window_start=current.window_end, window_length=window_length
                        )
                    current.posts.append(post)
            else:
                if stop is not None and stop.is_set():
                    break
                if idle_timeout is not None and time.monotonic() - idle_since >= idle_timeout:
                    break
                time.sleep(poll_seconds)
    if current is not None and current.posts:
        yield current
