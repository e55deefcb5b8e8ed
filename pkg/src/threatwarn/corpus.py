"""Time-aware inverted index over darkweb, deepweb, and blog posts.

The index answers as-of-time questions: how many posts mentioned a term up
to a given instant, and which posts were they. Posting lists are kept
sorted by (timestamp, post id), so as-of counts are a single bisect and
historical replays never leak future posts.

Snapshots are a small framed binary format: ``CIDX`` magic, a u16 version,
length-prefixed named sections (documents, postings), and a trailing
64-bit BLAKE2b checksum over everything before it.
"""

from __future__ import annotations

import hashlib
import json
import struct
from bisect import bisect_right, insort
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import BinaryIO, Iterable

from .errors import DuplicateIdError, RecordParseError, SnapshotError, WrongSourceError
from .ingest import Source, SourcePost, parse_post_record, post_to_record
from .textproc import normalize, tokenize

#: Sources the corpus accepts; the expert feed is queried, never indexed.
CORPUS_SOURCES = frozenset({Source.DARKWEB, Source.DEEPWEB, Source.BLOG})

EXCERPT_CHARS = 280

_MAGIC = b"CIDX"
_VERSION = 1
_CHECKSUM_BYTES = 8


@dataclass(frozen=True)
class Posting:
    """One (post, term) hit: where and when, plus the raw occurrence count."""

    post_id: str
    timestamp: datetime
    occurrences: int


@dataclass(frozen=True)
class CorpusMention:
    """A query hit returned to callers: post id, timestamp, text excerpt."""

    post_id: str
    timestamp: datetime
    excerpt: str


def _posting_key(posting: Posting) -> tuple[datetime, str]:
    return (posting.timestamp, posting.post_id)


class CorpusIndex:
    """Inverted index with as-of-time mention counts and content retrieval.

    Not internally synchronized: safe for many concurrent readers or one
    writer, never both (callers serialize writes against reads).
    """

    def __init__(self) -> None:
        self._postings: dict[str, list[Posting]] = {}
        self._documents: dict[str, SourcePost] = {}

    @property
    def doc_count(self) -> int:
        return len(self._documents)

    @property
    def term_count(self) -> int:
        return len(self._postings)

    def __contains__(self, post_id: str) -> bool:
        return post_id in self._documents

    def add_post(self, post: SourcePost) -> None:
        """Index one post; equivalent to having built the index with it included."""
        if post.source not in CORPUS_SOURCES:
            raise WrongSourceError(
                f"post {post.id!r} has source {post.source.value!r}; "
                "only darkweb, deepweb, and blog posts are indexed"
            )
        if post.id in self._documents:
            raise DuplicateIdError(f"post id already indexed: {post.id!r}")
        self._documents[post.id] = post
        tokens = tokenize(normalize(post.text))
        occurrences: dict[str, int] = {}
        for token in tokens:
            occurrences[token] = occurrences.get(token, 0) + 1
        for term, count in occurrences.items():
            posting = Posting(post_id=post.id, timestamp=post.timestamp, occurrences=count)
            insort(self._postings.setdefault(term, []), posting, key=_posting_key)

    def mention_count(self, term: str, as_of: datetime) -> int:
        """Number of indexed posts containing ``term`` with timestamp <= ``as_of``."""
        postings = self._postings.get(term)
        if not postings:
            return 0
        return bisect_right(postings, as_of, key=lambda p: p.timestamp)

    def mention_posts(self, term: str, as_of: datetime, limit: int) -> list[CorpusMention]:
        """Up to ``limit`` matching posts, timestamp-ascending, with excerpts."""
        if limit < 0:
            raise ValueError(f"limit must be >= 0, got {limit}")
        postings = self._postings.get(term)
        if not postings or limit == 0:
            return []
        count = bisect_right(postings, as_of, key=lambda p: p.timestamp)
        return [
            CorpusMention(
                post_id=p.post_id,
                timestamp=p.timestamp,
                excerpt=self._documents[p.post_id].text[:EXCERPT_CHARS],
            )
            for p in postings[: min(limit, count)]
        ]

    def postings_for(self, term: str) -> list[Posting]:
        """The full posting list for a term (copy), mainly for diagnostics."""
        return list(self._postings.get(term, []))

    # ----------------------------------------------------------------------
    # Snapshot persistence

    def save_snapshot(self, sink: BinaryIO) -> None:
        """Write a checksummed binary snapshot of the whole index."""
        documents_payload = json.dumps(
            [post_to_record(self._documents[pid]) for pid in sorted(self._documents)],
            separators=(",", ":"),
        ).encode("utf-8")
        postings_payload = json.dumps(
            {
                term: [
                    [p.post_id, int(p.timestamp.timestamp()), p.occurrences]
                    for p in self._postings[term]
                ]
                for term in sorted(self._postings)
            },
            separators=(",", ":"),
        ).encode("utf-8")
        body = bytearray()
        body += _MAGIC
        body += struct.pack("<HH", _VERSION, 2)
        for name, payload in (("documents", documents_payload), ("postings", postings_payload)):
            encoded = name.encode("utf-8")
            body += struct.pack("<H", len(encoded))
            body += encoded
            body += struct.pack("<Q", len(payload))
            body += payload
        checksum = hashlib.blake2b(bytes(body), digest_size=_CHECKSUM_BYTES).digest()
        sink.write(bytes(body) + checksum)


def build_index(posts: Iterable[SourcePost]) -> CorpusIndex:
    """Index a batch of posts. Ids must be unique; sources must be corpus sources."""
    index = CorpusIndex()
    for post in posts:
        index.add_post(post)
    return index


def load_snapshot(source: BinaryIO) -> CorpusIndex:
    """Reload an index saved by :meth:`CorpusIndex.save_snapshot`.

    Verifies magic, version, framing, and checksum; any mismatch raises
    :class:`SnapshotError`.
    """
    blob = source.read()
    if len(blob) < len(_MAGIC) + 4 + _CHECKSUM_BYTES:
        raise SnapshotError("snapshot truncated")
    body, checksum = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    expected = hashlib.blake2b(body, digest_size=_CHECKSUM_BYTES).digest()
    if checksum != expected:
        raise SnapshotError("snapshot checksum mismatch")
    if body[: len(_MAGIC)] != _MAGIC:
        raise SnapshotError("not a corpus index snapshot (bad magic)")
    offset = len(_MAGIC)
    version, section_count = struct.unpack_from("<HH", body, offset)
    offset += 4
    if version != _VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    sections: dict[str, bytes] = {}
    for _ in range(section_count):
        try:
            (name_len,) = struct.unpack_from("<H", body, offset)
            offset += 2
            name = body[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (payload_len,) = struct.unpack_from("<Q", body, offset)
            offset += 8
            payload = body[offset : offset + payload_len]
            if len(payload) != payload_len:
                raise SnapshotError("snapshot truncated inside section")
            offset += payload_len
        except struct.error:
            raise SnapshotError("snapshot truncated inside section table") from None
        sections[name] = payload
    if offset != len(body):
        raise SnapshotError("trailing bytes after last section")
    for required in ("documents", "postings"):
        if required not in sections:
            raise SnapshotError(f"snapshot missing section {required!r}")

    index = CorpusIndex()
    try:
        records = json.loads(sections["documents"].decode("utf-8"))
        for record in records:
            post = parse_post_record(record)
            index._documents[post.id] = post
        raw_postings = json.loads(sections["postings"].decode("utf-8"))
        for term, entries in raw_postings.items():
            postings = [
                Posting(
                    post_id=post_id,
                    timestamp=datetime.fromtimestamp(epoch, tz=timezone.utc),
                    occurrences=occurrences,
                )
                for post_id, epoch, occurrences in entries
            ]
            index._postings[term] = postings
    except (ValueError, KeyError, TypeError, RecordParseError) as exc:
        raise SnapshotError(f"snapshot payload malformed: {exc}") from None
    for term, postings in index._postings.items():
        for posting in postings:
            if posting.post_id not in index._documents:
                raise SnapshotError(
                    f"posting for {term!r} references unknown post {posting.post_id!r}"
                )
    return index
