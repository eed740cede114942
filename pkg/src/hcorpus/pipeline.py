"""Stage orchestration: ingest → segment → align → enrich → group.

Every stage is idempotent and resumable: it reads the stores, does only
the work whose outputs are missing, and reports counts. A failing stage
halts the stages after it; the summary marks the run partial so a rerun
can resume from the stores' current state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import align as align_mod
from . import markers
from .annotator import MockAnnotator, RemoteAnnotator, RetryPolicy
from .config import PipelineConfig
from .enrich import Enricher
from .ingest import apply_reclassification, load_book, load_reclassification_table, load_source_manifest
from .model import (
    Category,
    EnrichmentBundle,
    Narration,
    QcFlag,
    SourceBook,
    UnresolvedWindow,
)
from .segment import RuleBackend, AnnotatorBackend, segment_book
from .similarity import group_identical
from .store import RecordStore
from .stream import PageStream

logger = logging.getLogger(__name__)


class StageError(Exception):
    """A pipeline stage could not run (missing inputs, backend failure)."""


@dataclass
class StageSummary:
    name: str
    processed: int = 0
    written: int = 0
    skipped: int = 0
    flagged: int = 0
    failed: int = 0
    detail: str = ""

    def line(self) -> str:
        parts = ["%s:" % self.name, "processed=%d" % self.processed,
                 "written=%d" % self.written, "skipped=%d" % self.skipped]
        if self.flagged:
            parts.append("flagged=%d" % self.flagged)
        if self.failed:
            parts.append("failed=%d" % self.failed)
        if self.detail:
            parts.append("(%s)" % self.detail)
        return " ".join(parts)


@dataclass
class RunSummary:
    stages: list[StageSummary] = field(default_factory=list)
    completed: bool = True
    halted_at: str = ""
    error: str = ""

    def format_text(self) -> str:
        lines = [s.line() for s in self.stages]
        if not self.completed:
            lines.append("pipeline halted at stage %r: %s" % (self.halted_at, self.error))
        else:
            lines.append("pipeline complete")
        return "\n".join(lines)


def make_client(config: PipelineConfig):
    if config.annotator.endpoint:
        rate = config.annotator.rate_per_second or None
        return RemoteAnnotator(
            endpoint=config.annotator.endpoint,
            policy=RetryPolicy(
                max_attempts=config.annotator.max_attempts,
                backoff_initial=config.annotator.backoff_initial,
            ),
            rate_limit=rate,
            timeout=config.annotator.timeout,
        )
    return MockAnnotator(tag_vocabulary=tuple(config.enrich.tag_vocabulary))


def _require_store(path, stage: str) -> None:
    if not path.exists():
        raise StageError("%s: missing input store %s" % (stage, path))


# -- stages -------------------------------------------------------------------


def stage_ingest(config: PipelineConfig) -> StageSummary:
    summary = StageSummary("ingest")
    if not config.sources_path:
        raise StageError("ingest: config.sources_path is not set")
    entries = load_source_manifest(config.sources_path)
    reclass = (
        load_reclassification_table(config.reclassification_path)
        if config.reclassification_path
        else {}
    )
    Path(config.work_dir).mkdir(parents=True, exist_ok=True)
    with RecordStore(config.books_store) as books:
        for entry in entries:
            summary.processed += 1
            book = load_book(entry.path, entry.book_id, entry.category, config.normalization)
            book = apply_reclassification(book, reclass)
            existing = books.get(SourceBook.KIND, book.book_id)
            if existing is not None and existing.to_dict() == book.to_dict():
                summary.skipped += 1
                continue
            books.put(book)
            summary.written += 1
    return summary


def stage_segment(config: PipelineConfig, client=None) -> StageSummary:
    summary = StageSummary("segment")
    _require_store(config.books_store, "segment")
    if config.segment.backend == "annotator":
        backend = AnnotatorBackend(client or make_client(config))
    else:
        backend = RuleBackend()
    with RecordStore(config.books_store) as books, \
            RecordStore(config.narrations_store) as narrations, \
            RecordStore(config.unresolved_store) as unresolved_store:
        segmented_books = {n.book_id for n in narrations.records(Narration.KIND)}
        pending: dict[str, set[tuple[int, int]]] = {}
        for w in unresolved_store.records(UnresolvedWindow.KIND):
            if not w.resolved:
                pending.setdefault(w.book_id, set()).add((w.first_unit, w.last_unit))
        for book in books.records(SourceBook.KIND):
            if book.category != Category.HADITH:
                summary.skipped += 1
                continue
            only = None
            if book.book_id in segmented_books:
                if book.book_id not in pending:
                    summary.skipped += 1
                    continue
                only = pending[book.book_id]  # retry just the failed windows
            summary.processed += 1
            result = segment_book(
                book,
                backend,
                window_units=config.segment.window_units,
                overlap_units=config.segment.overlap_units,
                max_unit_chars=config.segment.max_unit_chars,
                only_windows=only,
            )
            for narration in result.narrations:
                narrations.put(narration)
                summary.written += 1
                if narration.qc_flags:
                    summary.flagged += 1
            still = {(w.first_unit, w.last_unit) for w in result.unresolved}
            for w in result.unresolved:
                unresolved_store.put(w)
                summary.failed += 1
            if only is not None:
                for first, last in only - still:
                    w = unresolved_store.get(UnresolvedWindow.KIND, "%s:%d-%d" % (book.book_id, first, last))
                    if w is not None:
                        w.resolved = True
                        unresolved_store.put(w)
    return summary


def stage_align(config: PipelineConfig) -> StageSummary:
    """Verify each narration against its source book.

    The narration's span is re-read from the page stream and compared
    with the canonical reconstruction (chain + separator + text); the
    similarity becomes the narration's fidelity score.
    """
    summary = StageSummary("align")
    _require_store(config.books_store, "align")
    _require_store(config.narrations_store, "align")
    with RecordStore(config.books_store) as books, \
            RecordStore(config.narrations_store) as narrations:
        streams: dict[str, PageStream] = {}
        for narration in narrations.records(Narration.KIND):
            summary.processed += 1
            if narration.fidelity is not None:
                summary.skipped += 1
                continue
            if narration.book_id not in streams:
                book = books.get(SourceBook.KIND, narration.book_id)
                if book is None:
                    raise StageError("align: narration %s references unknown book %s"
                                     % (narration.narration_id, narration.book_id))
                streams[narration.book_id] = PageStream(book)
            stream = streams[narration.book_id]
            source = stream.text[narration.char_start:narration.char_end]
            rebuilt = (
                narration.chain + markers.CANONICAL_SEPARATOR + narration.text
                if narration.chain
                else narration.text
            )
            narration.fidelity = align_mod.similarity(rebuilt, source)
            if narration.fidelity < config.align.min_fidelity:
                if QcFlag.LOW_FIDELITY not in narration.qc_flags:
                    narration.qc_flags.append(QcFlag.LOW_FIDELITY)
                summary.flagged += 1
            narrations.put(narration)
            summary.written += 1
    return summary


def stage_enrich(config: PipelineConfig, client=None) -> StageSummary:
    summary = StageSummary("enrich")
    _require_store(config.narrations_store, "enrich")
    client = client or make_client(config)
    enricher = Enricher(
        client,
        languages=tuple(config.enrich.languages),
        tag_vocabulary=tuple(config.enrich.tag_vocabulary),
    )
    with RecordStore(config.narrations_store) as narrations, \
            RecordStore(config.bundles_store) as bundles:
        stats = enricher.enrich_all(narrations, bundles)
    summary.processed = stats.narrations
    summary.written = stats.bundles_written
    summary.skipped = stats.narrations - stats.bundles_written
    summary.flagged = stats.flagged
    summary.failed = stats.failed
    summary.detail = "requests=%d layers=%d" % (stats.requests, stats.layers_written)
    return summary


def stage_group(config: PipelineConfig) -> StageSummary:
    summary = StageSummary("group")
    _require_store(config.narrations_store, "group")
    with RecordStore(config.narrations_store) as narrations:
        texts = {}
        for narration in narrations.records(Narration.KIND):
            if QcFlag.NON_HADITH_SUSPECT in narration.qc_flags:
                continue
            texts[narration.narration_id] = narration.text
        groups = group_identical(texts, threshold=config.group.threshold)
        summary.processed = len(texts)
        for narration in narrations.records(Narration.KIND):
            new_group = groups.get(narration.narration_id)
            if new_group is not None and narration.group_id != new_group:
                narration.group_id = new_group
                narrations.put(narration)
                summary.written += 1
            else:
                summary.skipped += 1
        summary.detail = "groups=%d" % len(set(groups.values()))
    return summary


_STAGES = {
    "ingest": stage_ingest,
    "segment": stage_segment,
    "align": stage_align,
    "enrich": stage_enrich,
    "group": stage_group,
}


def run_pipeline(config: PipelineConfig, client=None) -> RunSummary:
    config.validate()
    run = RunSummary()
    for name in config.stages:
        stage = _STAGES[name]
        try:
            if name in ("segment", "enrich"):
                summary = stage(config, client)
            else:
                summary = stage(config)
        except Exception as exc:
            logger.error("stage %s failed: %s", name, exc)
            run.completed = False
            run.halted_at = name
            run.error = str(exc)
            break
        run.stages.append(summary)
    return run
