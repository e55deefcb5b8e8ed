"""Command-line entry points: replay, run (live tail), query, eval, serve."""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from typing import Iterator

from . import alerts, evaluation
from .errors import EngineError
from .filters import CONTEXT_AUGMENTED, CONTEXT_MODES
from .ingest import DictionaryRole, format_rfc3339, parse_timestamp
from .pipeline import EngineConfig, ReplayResult, build_engine, load_corpus_index, replay_file

log = logging.getLogger(__name__)

_ROLE_NAMES = ", ".join(role.value for role in DictionaryRole)


def _add_engine_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--experts", metavar="PATH", help="expert handle list, one per line")
    parser.add_argument(
        "--dict",
        dest="dictionaries",
        metavar="ROLE=PATH",
        action="append",
        default=[],
        help=f"dictionary file by role (repeatable); roles: {_ROLE_NAMES}",
    )
    parser.add_argument("--posts", metavar="PATH", help="corpus post file (darkweb/deepweb/blog)")
    parser.add_argument("--snapshot", metavar="PATH", help="corpus index snapshot to load")
    parser.add_argument("--window-minutes", type=int, default=60, help="window length (default 60)")
    parser.add_argument(
        "--context",
        choices=CONTEXT_MODES,
        default=CONTEXT_AUGMENTED,
        help="context terms: threat dictionary only, or augmented with co-occurring jargon",
    )
    parser.add_argument("--threshold", type=int, default=alerts.DEFAULT_FREQUENCY_THRESHOLD,
                        help="minimum per-window frequency for a warning (default 2)")
    parser.add_argument("--excerpt-limit", type=int, default=alerts.DEFAULT_EXCERPT_LIMIT,
                        help="max corpus post excerpts per warning (default 10)")


def _config_from_args(args: argparse.Namespace) -> EngineConfig:
    dictionary_paths: dict[DictionaryRole, list[str]] = {}
    for spec in args.dictionaries:
        role_name, sep, path = spec.partition("=")
        if not sep or not path:
            raise EngineError(f"--dict expects ROLE=PATH, got {spec!r}")
        try:
            role = DictionaryRole(role_name)
        except ValueError:
            raise EngineError(f"unknown dictionary role {role_name!r} (roles: {_ROLE_NAMES})") from None
        dictionary_paths.setdefault(role, []).append(path)
    return EngineConfig(
        dictionary_paths=dictionary_paths,
        experts_path=args.experts,
        corpus_path=args.posts,
        snapshot_path=args.snapshot,
        window_minutes=args.window_minutes,
        context_mode=args.context,
        excerpt_limit=args.excerpt_limit,
        threshold=args.threshold,
        listen=getattr(args, "listen", "127.0.0.1:8080"),
    )


@contextmanager
def _stage(name: str) -> Iterator[None]:
    """Attach a pipeline stage name to any engine error raised inside."""
    try:
        yield
    except (EngineError, OSError, ValueError) as exc:
        raise EngineError(f"{name}: {exc}") from exc


def _print_summary(result: ReplayResult) -> None:
    mean_ms = result.mean_window_seconds * 1000.0
    print(
        f"windows processed: {result.windows}  "
        f"warnings emitted: {len(result.store)}  "
        f"mean window latency: {mean_ms:.1f} ms"
    )


def cmd_replay(args: argparse.Namespace) -> int:
    with _stage("configuration"):
        config = _config_from_args(args)
    with _stage("loading"):
        engine = build_engine(config)
    with _stage("replay"):
        with open(args.output, "w", encoding="utf-8") as sink:
            result = replay_file(engine, args.feed, sink)
    _print_summary(result)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    with _stage("configuration"):
        config = _config_from_args(args)
    with _stage("loading"):
        engine = build_engine(config)
    windows = 0
    emitted = 0
    with _stage("live feed"):
        with open(args.output, "w", encoding="utf-8") as sink:
            try:
                for warnings in engine.follow(
                    args.feed,
                    poll_seconds=args.poll_seconds,
                    idle_timeout=args.idle_timeout,
                ):
                    emitted += alerts.write_warnings(warnings, sink)
                    sink.flush()
                    windows += 1
            except KeyboardInterrupt:
                pass
    print(f"windows processed: {windows}  warnings emitted: {emitted}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    with _stage("configuration"):
        config = _config_from_args(args)
    try:
        as_of = parse_timestamp(args.as_of)
    except ValueError as exc:
        print(f"unparseable --as-of value: {exc}", file=sys.stderr)
        return 2
    with _stage("corpus"):
        index = load_corpus_index(config)
    count = index.mention_count(args.term, as_of)
    mentions = index.mention_posts(args.term, as_of, config.excerpt_limit)
    print(f"term: {args.term}")
    print(f"as of: {format_rfc3339(as_of)}")
    print(f"mentions: {count}")
    for mention in mentions:
        print(f"  {format_rfc3339(mention.timestamp)}  {mention.post_id}  {mention.excerpt}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    with _stage("warnings"):
        with open(args.warnings, "r", encoding="utf-8") as handle:
            store = alerts.read_warnings(handle)
    if args.annotations:
        with _stage("annotations"):
            with open(args.annotations, "r", encoding="utf-8") as handle:
                matrix = evaluation.load_annotations(handle)
        report = evaluation.precision_report(matrix, args.majority)
        print(f"warnings annotated: {len(matrix.warning_ids)}")
        print("annotator  threats  false_alarms  precision")
        for aid in matrix.annotator_ids:
            score = report.per_annotator[aid]
            print(
                f"{aid:<9}  {score.threats:>7}  {score.false_alarms:>12}  "
                f"{score.precision * 100:.2f}%"
            )
        print(
            f"majority precision ({report.majority_threshold} of "
            f"{len(matrix.annotator_ids)}): {report.majority_precision * 100:.2f}%"
        )
    rows = evaluation.threat_summary(store)
    print(f"warnings stored: {len(store)}")
    print("term  warnings  twitter_mentions  darkweb_mentions")
    for row in rows:
        print(
            f"{row.term}  {row.warning_count}  {row.twitter_mentions}  {row.darkweb_mentions}"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    with _stage("configuration"):
        config = _config_from_args(args)
    with _stage("corpus"):
        index = load_corpus_index(config)
    store = alerts.WarningStore()
    if args.warnings:
        with _stage("warnings"):
            with open(args.warnings, "r", encoding="utf-8") as handle:
                store = alerts.read_warnings(handle)
    app = create_app(index, store, excerpt_limit=config.excerpt_limit)
    host, _, port = args.listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threatwarn",
        description="Early-warning engine for cyber-threat terms in expert feeds",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    replay = sub.add_parser("replay", help="replay a recorded feed and write warnings")
    _add_engine_args(replay)
    replay.add_argument("feed", metavar="FEED", help="expert post file to replay")
    replay.add_argument("--output", required=True, metavar="PATH", help="warning output file")
    replay.set_defaults(handler=cmd_replay)

    run = sub.add_parser("run", help="tail a live feed file and emit warnings as windows close")
    _add_engine_args(run)
    run.add_argument("feed", metavar="FEED", help="append-only post file to follow")
    run.add_argument("--output", required=True, metavar="PATH", help="warning output file")
    run.add_argument("--poll-seconds", type=float, default=1.0, help="tail poll interval")
    run.add_argument(
        "--idle-timeout",
        type=float,
        default=None,
        help="stop after this many seconds without new data (default: run forever)",
    )
    run.set_defaults(handler=cmd_run)

    query = sub.add_parser("query", help="look a term up in the corpus index")
    _add_engine_args(query)
    query.add_argument("term", metavar="TERM", help="normalized term to look up")
    query.add_argument("--as-of", required=True, metavar="TIME",
                       help="RFC-3339 instant bounding the lookup")
    query.set_defaults(handler=cmd_query)

    evaluate = sub.add_parser("eval", help="score warnings against annotations")
    evaluate.add_argument("--warnings", required=True, metavar="PATH", help="warning file")
    evaluate.add_argument("--annotations", metavar="PATH", help="annotation file")
    evaluate.add_argument("--majority", type=int, default=None,
                          help="votes needed to count a warning legitimate")
    evaluate.set_defaults(handler=cmd_eval)

    serve = sub.add_parser("serve", help="serve warnings and corpus queries over HTTP")
    _add_engine_args(serve)
    serve.add_argument("--warnings", metavar="PATH", help="warning file to serve")
    serve.add_argument("--listen", default="127.0.0.1:8080", metavar="HOST:PORT")
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
