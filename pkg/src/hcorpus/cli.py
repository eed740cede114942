"""Command-line entry point.

One binary, one subcommand per pipeline stage plus ``run`` for the whole
pipeline, ``eval`` for sampling/reports, ``value`` for the effort
valuation table, and ``serve`` for the review service.

Exit codes: 0 success, 2 configuration error, 3 I/O or input-format
error, 4 stage/backend failure, 5 domain validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import ConfigError, load_config
from .economics import (
    EconomicsError,
    EffortModel,
    build_valuation_table,
    load_task_records,
)
from .evaluate import (
    EvaluateError,
    build_report,
    draw_sample,
    format_comparative_report,
    format_report,
    build_comparative_report,
    report_to_csv,
)
from .ingest import IngestError
from .model import EnrichmentBundle, EvaluationRecord, InvariantViolation, Narration, QcFlag
from .pipeline import (
    StageError,
    run_pipeline,
    stage_align,
    stage_enrich,
    stage_group,
    stage_ingest,
    stage_segment,
)
from .segment import SegmentError
from .service import ReviewService
from .similarity import HashingEmbedder, group_identical, rank_neighbors
from .store import RecordStore, StoreError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_STAGE = 4
EXIT_VALIDATION = 5


def _config_from(args) -> "PipelineConfig":
    config = load_config(getattr(args, "config", None))
    if getattr(args, "sources", None):
        config.sources_path = args.sources
    if getattr(args, "reclassify", None):
        config.reclassification_path = args.reclassify
    return config


# -- subcommand handlers -------------------------------------------------------


def cmd_ingest(args) -> int:
    summary = stage_ingest(_config_from(args))
    print(summary.line())
    return EXIT_OK


def cmd_segment(args) -> int:
    summary = stage_segment(_config_from(args))
    print(summary.line())
    return EXIT_OK


def cmd_align(args) -> int:
    summary = stage_align(_config_from(args))
    print(summary.line())
    return EXIT_OK


def cmd_enrich(args) -> int:
    summary = stage_enrich(_config_from(args))
    print(summary.line())
    return EXIT_OK


def cmd_group(args) -> int:
    config = _config_from(args)
    if args.threshold is not None:
        config.group.threshold = args.threshold
    in_path = args.in_store or config.narrations_store
    out_path = args.out_store or in_path
    in_place = str(out_path) == str(in_path)
    with RecordStore(in_path, create=False) as source:
        narrations = list(source.records(Narration.KIND))
        texts = {n.narration_id: n.text for n in narrations
                 if QcFlag.NON_HADITH_SUSPECT not in n.qc_flags}
        groups = group_identical(texts, threshold=config.group.threshold)
        changed = set()
        for n in narrations:
            new_group = groups.get(n.narration_id)
            if new_group is not None and n.group_id != new_group:
                n.group_id = new_group
                changed.add(n.narration_id)
        if in_place:
            for n in narrations:
                if n.narration_id in changed:
                    source.put(n)
        else:
            with RecordStore(out_path) as sink:
                for n in narrations:
                    sink.put(n)
    print("group: narrations=%d groups=%d updated=%d"
          % (len(texts), len(set(groups.values())), len(changed)))
    return EXIT_OK


def cmd_similar(args) -> int:
    config = _config_from(args)
    with RecordStore(config.narrations_store, create=False) as narrations:
        texts = {n.narration_id: n.text for n in narrations.records(Narration.KIND)}
        tags = {}
        if config.bundles_store.exists():
            with RecordStore(config.bundles_store, create=False) as bundles:
                for b in bundles.records(EnrichmentBundle.KIND):
                    tags[b.narration_id] = list(b.tags)
    rows = rank_neighbors(args.id, texts, tags=tags, embedder=HashingEmbedder(), top=args.top)
    print("%-18s %9s %9s %9s" % ("narration", "semantic", "lexical", "thematic"))
    for row in rows:
        print("%-18s %9.4f %9.4f %9.4f"
              % (row["narration_id"], row["semantic"], row["lexical"], row["thematic"]))
    return EXIT_OK


def cmd_eval_sample(args) -> int:
    config = _config_from(args)
    with RecordStore(config.narrations_store, create=False) as narrations:
        ids = [n.narration_id for n in narrations.records(Narration.KIND)]
    for narration_id in draw_sample(ids, args.n, args.seed):
        print(narration_id)
    return EXIT_OK


def cmd_eval_report(args) -> int:
    config = _config_from(args)
    in_path = args.in_store or config.evaluations_store
    with RecordStore(in_path, create=False) as store:
        records = list(store.records(EvaluationRecord.KIND))
    if args.compare:
        with RecordStore(args.compare, create=False) as store:
            comparison = list(store.records(EvaluationRecord.KIND))
        report = build_comparative_report(records, comparison)
        if args.format == "csv":
            print(report_to_csv(report.primary, report.comparison), end="")
        else:
            print(format_comparative_report(report))
    else:
        report = build_report(records)
        if args.format == "csv":
            print(report_to_csv(report), end="")
        else:
            print(format_report(report))
    return EXIT_OK


def cmd_value(args) -> int:
    records = load_task_records(args.tasks)
    model = EffortModel(q0=args.q0, error_floor=args.epsilon)
    table = build_valuation_table(records, model)
    print(table.format_text() if args.format == "text" else table.to_csv(), end="\n" if args.format == "text" else "")
    return EXIT_OK


def cmd_serve(args) -> int:
    config = _config_from(args)
    if args.host:
        config.service.host = args.host
    if args.port is not None:
        config.service.port = args.port
    if args.static:
        config.service.static_dir = args.static
    service = ReviewService(config)
    print("listening on http://%s:%d" % service.address, flush=True)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.shutdown()
    return EXIT_OK


def cmd_run(args) -> int:
    config = _config_from(args)
    summary = run_pipeline(config)
    print(summary.format_text())
    if not summary.completed:
        return EXIT_STAGE
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcorpus",
        description="Corpus construction pipeline: ingest, segment, align, enrich, group, evaluate.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "load and normalize source books into the book store")
    p.add_argument("--sources", help="CSV of path,book_id,category")
    p.add_argument("--reclassify", help="CSV of book_id,category overrides")

    add("segment", cmd_segment, "segment books into narrations")
    add("align", cmd_align, "verify narration spans against sources (fidelity)")
    add("enrich", cmd_enrich, "run annotation layers over narrations")

    p = add("group", cmd_group, "group identical narrations")
    p.add_argument("--in", dest="in_store", help="narration store to read")
    p.add_argument("--out", dest="out_store", help="store to write (default: in place)")
    p.add_argument("--threshold", type=float, help="lexical similarity threshold")

    p = add("similar", cmd_similar, "rank nearest neighbors of one narration")
    p.add_argument("--id", required=True, help="narration id")
    p.add_argument("--top", type=int, default=10)

    eval_p = sub.add_parser("eval", help="evaluation sampling and reports")
    eval_sub = eval_p.add_subparsers(dest="eval_command", required=True)
    p = eval_sub.add_parser("sample", help="draw a reproducible random sample")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval_sample)
    p = eval_sub.add_parser("report", help="aggregate statistics over evaluation records")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--in", dest="in_store", help="evaluation store (default from config)")
    p.add_argument("--compare", help="second evaluation store for a side-by-side table")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_eval_report)

    p = add("value", cmd_value, "person-hour valuation table from task accuracies")
    p.add_argument("--tasks", help="CSV: task, hours (or h_tot), accuracy|MACHINE")
    p.add_argument("--epsilon", type=float, default=1e-3, help="residual error floor")
    p.add_argument("--q0", type=float, default=1.0, help="initial error level")
    p.add_argument("--format", choices=("text", "csv"), default="text")

    p = add("serve", cmd_serve, "run the review service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--static", help="directory of review-UI static files")

    add("run", cmd_run, "run the full pipeline")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IngestError, StoreError) as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except (StageError, SegmentError) as exc:
        print("stage error: %s" % exc, file=sys.stderr)
        return EXIT_STAGE
    except (InvariantViolation, EvaluateError, EconomicsError, ValueError, KeyError) as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
