"""Early-warning engine for cyber-threat terms surfacing in expert feeds.

The package watches curated expert social feeds in fixed time windows,
extracts terms that no dictionary knows but that co-occur with threat
vocabulary, cross-references them against an indexed darkweb/deepweb post
corpus, and emits structured warnings plus timeline and precision
analytics.
"""

from .alerts import (
    DEFAULT_EXCERPT_LIMIT,
    DEFAULT_FREQUENCY_THRESHOLD,
    ThreatWarning,
    TimelineEntry,
    WarningStore,
    darkweb_onset,
    generate_warnings,
    lead_time,
    read_warnings,
    timeline,
    warning_from_record,
    warning_to_record,
    write_warnings,
)
from .corpus import CorpusIndex, CorpusMention, Posting, build_index, load_snapshot
from .errors import (
    DictionaryFormatError,
    DuplicateIdError,
    EmptyDictionaryError,
    EngineError,
    RecordParseError,
    SnapshotError,
    WrongSourceError,
)
from .evaluation import (
    AnnotationMatrix,
    AnnotatorScore,
    LatencyStats,
    PrecisionReport,
    ThreatSummaryRow,
    annotator_precision,
    load_annotations,
    majority_precision,
    measure_latency,
    precision_report,
    threat_summary,
)
from .filters import (
    CONTEXT_AUGMENTED,
    CONTEXT_THREAT_ONLY,
    CandidateTerm,
    FilterChain,
    apply_context_mode,
    augmented_context,
    exclude_known,
    require_threat_context,
)
from .ingest import (
    Dictionary,
    DictionaryRole,
    ExpertList,
    Source,
    SourcePost,
    WindowBatch,
    filter_by_experts,
    format_rfc3339,
    load_dictionary,
    load_experts,
    load_posts,
    parse_timestamp,
    replay_windows,
    tail_windows,
)
from .pipeline import (
    EngineConfig,
    ReplayResult,
    WarningEngine,
    build_engine,
    replay_file,
)
from .textproc import TermCounts, aggregate_window, normalize, term_set, tokenize

__version__ = "0.1.0"

__all__ = [
    "AnnotationMatrix",
    "AnnotatorScore",
    "CandidateTerm",
    "CONTEXT_AUGMENTED",
    "CONTEXT_THREAT_ONLY",
    "CorpusIndex",
    "CorpusMention",
    "DEFAULT_EXCERPT_LIMIT",
    "DEFAULT_FREQUENCY_THRESHOLD",
    "Dictionary",
    "DictionaryFormatError",
    "DictionaryRole",
    "DuplicateIdError",
    "EmptyDictionaryError",
    "EngineConfig",
    "EngineError",
    "ExpertList",
    "FilterChain",
    "LatencyStats",
    "Posting",
    "PrecisionReport",
    "RecordParseError",
    "ReplayResult",
    "SnapshotError",
    "Source",
    "SourcePost",
    "TermCounts",
    "ThreatSummaryRow",
    "ThreatWarning",
    "TimelineEntry",
    "WarningEngine",
    "WarningStore",
    "WindowBatch",
    "WrongSourceError",
    "aggregate_window",
    "annotator_precision",
    "apply_context_mode",
    "augmented_context",
    "build_engine",
    "build_index",
    "darkweb_onset",
    "exclude_known",
    "filter_by_experts",
    "format_rfc3339",
    "generate_warnings",
    "lead_time",
    "load_annotations",
    "load_dictionary",
    "load_experts",
    "load_posts",
    "load_snapshot",
    "majority_precision",
    "measure_latency",
    "normalize",
    "parse_timestamp",
    "precision_report",
    "read_warnings",
    "replay_file",
    "replay_windows",
    "require_threat_context",
    "tail_windows",
    "term_set",
    "threat_summary",
    "timeline",
    "tokenize",
    "warning_from_record",
    "warning_to_record",
    "write_warnings",
]
