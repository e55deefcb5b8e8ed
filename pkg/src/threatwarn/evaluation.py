"""Annotation scoring, threat summaries, and pipeline latency measurement.

Annotation files are line-delimited JSON records with keys ``warning_id``,
``annotator_id``, and ``label`` (``legitimate`` or ``false_alarm``). Every
(warning, annotator) pair must be labeled exactly once.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import IO, Callable, Iterable

from .alerts import ThreatWarning, WarningStore
from .errors import RecordParseError
from .ingest import WindowBatch

LEGITIMATE = "legitimate"
FALSE_ALARM = "false_alarm"
LABELS = (LEGITIMATE, FALSE_ALARM)


@dataclass(frozen=True)
class AnnotationMatrix:
    """Complete labeling of a warning set by one or more annotators."""

    warning_ids: tuple[str, ...]
    annotator_ids: tuple[str, ...]
    labels: dict[tuple[str, str], str]

    @classmethod
    def from_labels(
        cls, labels: dict[tuple[str, str], str]
    ) -> "AnnotationMatrix":
        """Build a matrix from (warning_id, annotator_id) -> label, validating
        totality: every annotator must have labeled every warning."""
        warning_ids: list[str] = []
        annotator_ids: list[str] = []
        for wid, aid in labels:
            if wid not in warning_ids:
                warning_ids.append(wid)
            if aid not in annotator_ids:
                annotator_ids.append(aid)
        if not annotator_ids:
            raise ValueError("annotation matrix needs at least one annotator")
        for label in labels.values():
            if label not in LABELS:
                raise ValueError(f"unknown label {label!r}")
        for wid in warning_ids:
            for aid in annotator_ids:
                if (wid, aid) not in labels:
                    raise ValueError(
                        f"annotation matrix is not total: missing label for "
                        f"warning {wid!r} by annotator {aid!r}"
                    )
        return cls(
            warning_ids=tuple(warning_ids),
            annotator_ids=tuple(annotator_ids),
            labels=dict(labels),
        )


def load_annotations(source: IO[str]) -> AnnotationMatrix:
    """Read an annotation file into a validated matrix."""
    labels: dict[tuple[str, str], str] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordParseError(f"invalid JSON: {exc.msg}", lineno) from None
        try:
            key = (record["warning_id"], record["annotator_id"])
            label = record["label"]
        except (KeyError, TypeError) as exc:
            raise RecordParseError(f"bad annotation record: {exc}", lineno) from None
        if label not in LABELS:
            raise RecordParseError(f"unknown label {label!r}", lineno)
        if key in labels:
            raise RecordParseError(
                f"duplicate annotation for warning {key[0]!r} by {key[1]!r}", lineno
            )
        labels[key] = label
    try:
        return AnnotationMatrix.from_labels(labels)
    except ValueError as exc:
        raise RecordParseError(str(exc), lineno if labels else 0) from None


@dataclass(frozen=True)
class AnnotatorScore:
    threats: int
    false_alarms: int
    precision: float


@dataclass(frozen=True)
class PrecisionReport:
    per_annotator: dict[str, AnnotatorScore]
    majority_precision: float
    majority_threshold: int


def annotator_precision(matrix: AnnotationMatrix, annotator: str) -> AnnotatorScore:
    """Threats, false alarms, and precision for one annotator."""
    if annotator not in matrix.annotator_ids:
        raise KeyError(f"unknown annotator {annotator!r}")
    threats = sum(
        1 for wid in matrix.warning_ids if matrix.labels[(wid, annotator)] == LEGITIMATE
    )
    false_alarms = len(matrix.warning_ids) - threats
    return AnnotatorScore(
        threats=threats,
        false_alarms=false_alarms,
        precision=threats / len(matrix.warning_ids) if matrix.warning_ids else 0.0,
    )


def default_majority_threshold(annotator_count: int) -> int:
    """Smallest strict-majority size: ceil((n + 1) / 2)."""
    return (annotator_count + 2) // 2


def majority_precision(matrix: AnnotationMatrix, threshold: int | None = None) -> float:
    """Fraction of warnings labeled legitimate by at least ``threshold``
    annotators (default: a strict majority)."""
    n = len(matrix.annotator_ids)
    if threshold is None:
        threshold = default_majority_threshold(n)
    if not 1 <= threshold <= n:
        raise ValueError(f"threshold must be in 1..{n}, got {threshold}")
    if not matrix.warning_ids:
        return 0.0
    legitimate = 0
    for wid in matrix.warning_ids:
        votes = sum(
            1 for aid in matrix.annotator_ids if matrix.labels[(wid, aid)] == LEGITIMATE
        )
        if votes >= threshold:
            legitimate += 1
    return legitimate / len(matrix.warning_ids)


def precision_report(matrix: AnnotationMatrix, threshold: int | None = None) -> PrecisionReport:
    if threshold is None:
        threshold = default_majority_threshold(len(matrix.annotator_ids))
    return PrecisionReport(
        per_annotator={
            aid: annotator_precision(matrix, aid) for aid in matrix.annotator_ids
        },
        majority_precision=majority_precision(matrix, threshold),
        majority_threshold=threshold,
    )


# --------------------------------------------------------------------------
# Threat summaries


@dataclass(frozen=True)
class ThreatSummaryRow:
    term: str
    warning_count: int
    twitter_mentions: int
    darkweb_mentions: int


def threat_summary(store: WarningStore) -> list[ThreatSummaryRow]:
    """Per-term totals, sorted by warning count descending (ties by term).

    Twitter mentions sum the per-window frequencies; darkweb mentions take
    the highest cumulative corpus count ever reported for the term.
    """
    grouped: dict[str, list[ThreatWarning]] = {}
    for warning in store:
        grouped.setdefault(warning.term, []).append(warning)
    rows = [
        ThreatSummaryRow(
            term=term,
            warning_count=len(group),
            twitter_mentions=sum(w.twitter_frequency for w in group),
            darkweb_mentions=max(w.darkweb_frequency for w in group),
        )
        for term, group in grouped.items()
    ]
    rows.sort(key=lambda r: (-r.warning_count, r.term))
    return rows


# --------------------------------------------------------------------------
# Latency


@dataclass(frozen=True)
class LatencyStats:
    mean_seconds: float
    p95_seconds: float
    windows: int
    total_seconds: float


def measure_latency(
    process_window: Callable[[WindowBatch], object],
    batches: Iterable[WindowBatch],
) -> LatencyStats:
    """Wall-clock the per-window pipeline over a sequence of batches."""
    durations: list[float] = []
    for batch in batches:
        started = time.perf_counter()
        process_window(batch)
        durations.append(time.perf_counter() - started)
    if not durations:
        raise ValueError("no windows to measure")
    ordered = sorted(durations)
    p95_index = max(0, -(-len(ordered) * 95 // 100) - 1)
    return LatencyStats(
        mean_seconds=sum(durations) / len(durations),
        p95_seconds=ordered[p95_index],
        windows=len(durations),
        total_seconds=sum(durations),
    )
