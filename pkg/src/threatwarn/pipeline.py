"""End-to-end engine assembly: config, per-window processing, replay, live tail.

The engine is deterministic: identical dictionaries, expert list, corpus,
and feed produce byte-identical warning output on every run.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import IO, Iterable, Iterator

from . import alerts
from .alerts import ThreatWarning, WarningStore
from .corpus import CorpusIndex, build_index, load_snapshot
from .filters import (
    CONTEXT_AUGMENTED,
    CONTEXT_MODES,
    FilterChain,
    apply_context_mode,
    exclude_known,
    require_threat_context,
)
from .ingest import (
    Dictionary,
    DictionaryRole,
    ExpertList,
    SourcePost,
    Source,
    WindowBatch,
    filter_by_experts,
    load_dictionary,
    load_experts,
    load_posts,
    replay_windows,
    tail_windows,
)
from .textproc import aggregate_window

log = logging.getLogger(__name__)


@dataclass
class EngineConfig:
    """Paths and knobs needed to assemble a running engine."""

    dictionary_paths: dict[DictionaryRole, list[str]] = field(default_factory=dict)
    experts_path: str | None = None
    corpus_path: str | None = None
    snapshot_path: str | None = None
    window_minutes: int = 60
    context_mode: str = CONTEXT_AUGMENTED
    excerpt_limit: int = alerts.DEFAULT_EXCERPT_LIMIT
    threshold: int = alerts.DEFAULT_FREQUENCY_THRESHOLD
    listen: str = "127.0.0.1:8080"

    def validate(self) -> None:
        if self.window_minutes <= 0:
            raise ValueError("window length must be positive")
        if self.threshold < 1:
            raise ValueError("frequency threshold must be >= 1")
        if self.excerpt_limit < 0:
            raise ValueError("excerpt limit must be >= 0")
        if self.context_mode not in CONTEXT_MODES:
            raise ValueError(f"unknown context mode {self.context_mode!r}")
        if DictionaryRole.THREAT not in self.dictionary_paths:
            raise ValueError("a threat dictionary is required")
        exclusions = [r for r in self.dictionary_paths if r is not DictionaryRole.THREAT]
        if not exclusions:
            raise ValueError("at least one exclusion dictionary is required")
        for role, paths in self.dictionary_paths.items():
            for path in paths:
                if not Path(path).exists():
                    raise FileNotFoundError(f"{role.value} dictionary not found: {path}")
        for label, path in (("experts", self.experts_path), ("corpus", self.corpus_path),
                            ("snapshot", self.snapshot_path)):
            if path is not None and not Path(path).exists():
                raise FileNotFoundError(f"{label} file not found: {path}")

    @property
    def window_length(self) -> timedelta:
        return timedelta(minutes=self.window_minutes)


def load_chain(config: EngineConfig) -> FilterChain:
    """Load every configured dictionary into a filter chain."""
    exclusions: list[Dictionary] = []
    threat: Dictionary | None = None
    for role in DictionaryRole:
        for path in config.dictionary_paths.get(role, []):
            with open(path, "rb") as handle:
                dictionary = load_dictionary(handle, name=Path(path).stem, role=role)
            log.debug("loaded %s dictionary %s: %d terms", role.value, path, len(dictionary))
            if role is DictionaryRole.THREAT:
                threat = dictionary
            else:
                exclusions.append(dictionary)
    if threat is None:
        raise ValueError("a threat dictionary is required")
    return FilterChain(exclusion_dictionaries=tuple(exclusions), threat_dictionary=threat)


def load_corpus_index(config: EngineConfig) -> CorpusIndex:
    """Build the corpus index from a post file, a snapshot, or neither (empty)."""
    if config.snapshot_path:
        with open(config.snapshot_path, "rb") as handle:
            return load_snapshot(handle)
    if config.corpus_path:
        with open(config.corpus_path, "rb") as handle:
            return build_index(load_posts(handle))
    return CorpusIndex()


@dataclass(frozen=True)
class ReplayResult:
    store: WarningStore
    windows: int
    window_seconds: tuple[float, ...]

    @property
    def mean_window_seconds(self) -> float:
        return sum(self.window_seconds) / len(self.window_seconds) if self.window_seconds else 0.0


class WarningEngine:
    """The assembled pipeline: window in, warnings out."""

    def __init__(
        self,
        chain: FilterChain,
        experts: ExpertList,
        index: CorpusIndex,
        *,
        window_length: timedelta = timedelta(minutes=60),
        context_mode: str = CONTEXT_AUGMENTED,
        excerpt_limit: int = alerts.DEFAULT_EXCERPT_LIMIT,
        threshold: int = alerts.DEFAULT_FREQUENCY_THRESHOLD,
    ):
        if context_mode not in CONTEXT_MODES:
            raise ValueError(f"unknown context mode {context_mode!r}")
        self.chain = chain
        self.experts = experts
        self.index = index
        self.window_length = window_length
        self.context_mode = context_mode
        self.excerpt_limit = excerpt_limit
        self.threshold = threshold

    def process_window(self, batch: WindowBatch) -> list[ThreatWarning]:
        """Run aggregation, filtering, and warning generation for one window."""
        counts = aggregate_window(batch)
        survivors = exclude_known(counts, self.chain)
        candidates = require_threat_context(survivors, batch, self.chain)
        candidates = apply_context_mode(candidates, batch, self.chain, self.context_mode)
        generated_at = batch.window_start + batch.window_length
        warnings = alerts.generate_warnings(
            candidates,
            self.index,
            generated_at,
            excerpt_limit=self.excerpt_limit,
            threshold=self.threshold,
        )
        if warnings:
            log.debug(
                "window %s: %d warnings (%s)",
                batch.window_start.isoformat(),
                len(warnings),
                ", ".join(w.term for w in warnings),
            )
        return warnings

    def replay(self, posts: Iterable[SourcePost]) -> ReplayResult:
        """Replay a post history window by window, collecting all warnings."""
        expert_posts = filter_by_experts(posts, self.experts)
        store = WarningStore()
        durations: list[float] = []
        windows = 0
        for batch in replay_windows(expert_posts, self.window_length):
            started = time.perf_counter()
            store.extend(self.process_window(batch))
            durations.append(time.perf_counter() - started)
            windows += 1
        return ReplayResult(store=store, windows=windows, window_seconds=tuple(durations))

    def follow(
        self,
        feed_path: str,
        *,
        poll_seconds: float = 1.0,
        idle_timeout: float | None = None,
        stop: threading.Event | None = None,
    ) -> Iterator[list[ThreatWarning]]:
        """Tail a live feed file, yielding each completed window's warnings."""

        def is_expert_post(post: SourcePost) -> bool:
            return post.source is Source.EXPERT_FEED and post.author.lower() in self.experts.handles

        for batch in tail_windows(
            feed_path,
            self.window_length,
            keep=is_expert_post,
            poll_seconds=poll_seconds,
            idle_timeout=idle_timeout,
            stop=stop,
        ):
            yield self.process_window(batch)


def build_engine(config: EngineConfig) -> WarningEngine:
    """Load everything the config references and assemble the engine."""
    config.validate()
    if config.experts_path is None:
        raise ValueError("an experts file is required")
    with open(config.experts_path, "rb") as handle:
        experts = load_experts(handle)
    return WarningEngine(
        chain=load_chain(config),
        experts=experts,
        index=load_corpus_index(config),
        window_length=config.window_length,
        context_mode=config.context_mode,
        excerpt_limit=config.excerpt_limit,
        threshold=config.threshold,
    )


def replay_file(engine: WarningEngine, feed_path: str, output: IO[str]) -> ReplayResult:
    """Replay a feed file and write the warning records to ``output``."""
    with open(feed_path, "rb") as handle:
        posts = load_posts(handle)
    result = engine.replay(posts)
    alerts.write_warnings(result.store, output)
    return result
