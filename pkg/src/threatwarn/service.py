"""HTTP service exposing warnings, timelines, and corpus queries.

Read endpoints are side-effect free; the only write, ``POST /corpus/posts``,
is serialized by a lock so concurrent readers always observe a fully
applied index state. All timestamps on the wire are RFC-3339 UTC.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from typing import Any

from fastapi import Body, FastAPI, HTTPException

from .alerts import WarningStore, timeline, warning_to_record
from .corpus import CorpusIndex
from .errors import RecordParseError
from .ingest import Source, format_rfc3339, parse_post_record, parse_timestamp

_CORPUS_SOURCE_NAMES = {Source.DARKWEB.value, Source.DEEPWEB.value, Source.BLOG.value}


def _parse_time_param(name: str, value: str | None) -> datetime | None:
    if not value:  # absent or an empty query value
        return None
    try:
        return parse_timestamp(value)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"unparseable {name!r}: {value!r}") from None


def create_app(
    index: CorpusIndex,
    store: WarningStore | None = None,
    *,
    excerpt_limit: int = 10,
) -> FastAPI:
    """Build the service around a corpus index and an optional warning store."""
    store = store if store is not None else WarningStore()
    index_lock = threading.Lock()
    app = FastAPI(title="threatwarn", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz() -> dict:
        with index_lock:
            documents = index.doc_count
        return {"status": "ok", "documents": documents, "warnings": len(store)}

    @app.get("/warnings")
    def get_warnings(
        term: str | None = None, since: str | None = None, until: str | None = None
    ) -> list[dict]:
        since_at = _parse_time_param("since", since)
        until_at = _parse_time_param("until", until)
        records = []
        for warning in store:
            if term and warning.term != term:
                continue
            if since_at is not None and warning.generated_at < since_at:
                continue
            if until_at is not None and warning.generated_at > until_at:
                continue
            records.append(warning_to_record(warning))
        return records

    @app.get("/terms/{term}/timeline")
    def get_timeline(term: str) -> list[dict]:
        return [
            {
                "bucket_start": entry.bucket_start.isoformat(),
                "warning_count": entry.warning_count,
                "twitter_mentions": entry.twitter_mentions,
                "darkweb_mentions": entry.darkweb_mentions,
            }
            for entry in timeline(store, term)
        ]

    @app.get("/terms/{term}/mentions")
    def get_mentions(term: str, as_of: str | None = None, limit: int | None = None) -> dict:
        as_of_at = _parse_time_param("as_of", as_of) or datetime.now(tz=timezone.utc)
        if limit is None:
            limit = excerpt_limit
        if limit < 0:
            raise HTTPException(status_code=400, detail="limit must be >= 0")
        with index_lock:
            count = index.mention_count(term, as_of_at)
            mentions = index.mention_posts(term, as_of_at, limit)
        return {
            "term": term,
            "as_of": format_rfc3339(as_of_at),
            "count": count,
            "posts": [
                {
                    "post_id": m.post_id,
                    "timestamp": format_rfc3339(m.timestamp),
                    "excerpt": m.excerpt,
                }
                for m in mentions
            ],
        }

    @app.post("/corpus/posts", status_code=201)
    def ingest_posts(payload: Any = Body(...)) -> dict:
        records = payload if isinstance(payload, list) else [payload]
        posts = []
        for position, record in enumerate(records):
            try:
                post = parse_post_record(record, position)
            except RecordParseError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            if post.source.value not in _CORPUS_SOURCE_NAMES:
                raise HTTPException(
                    status_code=400,
                    detail=f"post {post.id!r}: source {post.source.value!r} is not indexable",
                )
            posts.append(post)
        seen = {p.id for p in posts}
        if len(seen) != len(posts):
            raise HTTPException(status_code=409, detail="duplicate post id within request")
        with index_lock:
            for post in posts:
                if post.id in index:
                    raise HTTPException(
                        status_code=409, detail=f"post id already indexed: {post.id!r}"
                    )
            for post in posts:
                index.add_post(post)
            documents = index.doc_count
        return {"added": len(posts), "documents": documents}

    return app
