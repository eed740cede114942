"""Windowed narration segmentation.

The page stream is tiled into semantic units (sentence-delimited, never
crossing a page boundary), units are grouped into fixed-size overlapping
windows, a backend judges each window, and the per-window verdicts are
stitched: duplicate spans from overlapping windows collapse, spans
truncated at a window edge yield to a fuller view from a neighboring
window, and anything the backends could not resolve is queued as
unresolved rather than dropped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from . import markers
from .model import Narration, QcFlag, SourceBook, UnresolvedWindow, narration_id
from .stream import SEAM, PageStream

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_UNITS = 12
DEFAULT_OVERLAP_UNITS = 3
DEFAULT_MAX_UNIT_CHARS = 480

#: Backend confidence at or below which a span is treated as a fragment.
FRAGMENT_CONFIDENCE = 0.3


class SegmentError(Exception):
    pass


@dataclass
class SemanticUnit:
    unit_index: int
    page_no: int
    start: int  # absolute offset into the page stream
    end: int
    text: str


@dataclass
class Window:
    first_unit: int
    last_unit: int  # inclusive


@dataclass
class VerdictSpan:
    """One span of a backend verdict, offsets relative to the window text."""

    chain: tuple[int, int] | None
    body: tuple[int, int]
    is_hadith: bool
    confidence: float


@dataclass
class SegmenterVerdict:
    spans: list[VerdictSpan] = field(default_factory=list)


@dataclass
class SegmentResult:
    narrations: list[Narration]
    unresolved: list[UnresolvedWindow]
    n_units: int
    n_windows: int


def _split_overlong(text: str, start: int, end: int, limit: int) -> list[tuple[int, int]]:
    pieces = []
    while end - start > limit:
        cut = start + limit
        for j in range(start + limit, start, -1):
            if text[j - 1].isspace():
                cut = j
                break
        if cut - start > limit:  # indivisible run: hard cut at the limit
            cut = start + limit
        pieces.append((start, cut))
        start = cut
    pieces.append((start, end))
    return pieces


def unitize(book: SourceBook | PageStream, max_unit_chars: int = DEFAULT_MAX_UNIT_CHARS) -> list[SemanticUnit]:
    """Tile the page stream into sentence units.

    Units never cross a page boundary; the seam character between pages is
    carried by the preceding page's final unit so the units tile the whole
    stream without gaps or overlaps.
    """
    if max_unit_chars < 1:
        raise SegmentError("max_unit_chars must be positive")
    stream = book if isinstance(book, PageStream) else PageStream(book)
    units: list[SemanticUnit] = []
    for page in stream.pages:
        page_units = []
        for s, e in markers.sentence_spans(stream.text, page.start, page.end):
            for cs, ce in _split_overlong(stream.text, s, e, max_unit_chars):
                page_units.append(SemanticUnit(0, page.page_no, cs, ce, ""))
        if page.end < len(stream.text) and stream.text[page.end] == SEAM:
            page_units[-1].end += 1
        units.extend(page_units)
    for i, unit in enumerate(units):
        unit.unit_index = i
        unit.text = stream.text[unit.start:unit.end]
    return units


def make_windows(
    n_units: int,
    window_units: int = DEFAULT_WINDOW_UNITS,
    overlap_units: int = DEFAULT_OVERLAP_UNITS,
) -> list[Window]:
    if window_units < 2 or not (0 < overlap_units < window_units):
        raise SegmentError("need window_units >= 2 and 0 < overlap_units < window_units")
    if n_units == 0:
        return []
    stride = window_units - overlap_units
    starts = [0]
    while starts[-1] + window_units < n_units:
        starts.append(starts[-1] + stride)
    return [Window(s, min(s + window_units, n_units) - 1) for s in starts]


# -- backends ----------------------------------------------------------------


class RuleBackend:
    """Deterministic segmentation keyed on transmission-formula markers."""

    name = "rule"

    def segment(self, window_text: str) -> SegmenterVerdict:
        spans = [
            VerdictSpan(chain=s.chain, body=s.body, is_hadith=s.is_hadith, confidence=s.confidence)
            for s in markers.parse_window(window_text)
        ]
        return SegmenterVerdict(spans=spans)


class AnnotatorBackend:
    """Segmentation through the annotator client's ``segment_window`` task.

    The client returns a JSON object ``{"spans": [{"chain": [s, e] | null,
    "body": [s, e], "is_hadith": bool, "confidence": x}, ...]}``.
    """

    name = "annotator"

    def __init__(self, client):
        self.client = client

    def segment(self, window_text: str) -> SegmenterVerdict:
        from .annotator import AnnotationRequest, Task

        outcome = self.client.annotate(AnnotationRequest(task=Task.SEGMENT_WINDOW, input_text=window_text))
        if not outcome.ok:
            raise SegmentError("segmentation backend failed: %s" % outcome.error)
        try:
            payload = json.loads(outcome.output)
            spans = [
                VerdictSpan(
                    chain=tuple(s["chain"]) if s.get("chain") is not None else None,
                    body=tuple(s["body"]),
                    is_hadith=bool(s["is_hadith"]),
                    confidence=float(s["confidence"]),
                )
                for s in payload["spans"]
            ]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SegmentError("malformed segmentation verdict: %s" % exc)
        return SegmenterVerdict(spans=spans)


def validate_verdict(verdict: SegmenterVerdict, window_len: int) -> None:
    """Backend contract: ordered, non-overlapping spans; chain precedes body."""
    prev_end = 0
    for span in verdict.spans:
        lo = span.chain[0] if span.chain is not None else span.body[0]
        hi = max(span.body[1], span.chain[1] if span.chain is not None else 0)
        if not (0 <= lo <= hi <= window_len):
            raise SegmentError("verdict span out of window bounds: %r" % (span,))
        if span.chain is not None and span.chain[1] > span.body[0] and span.body[1] > span.body[0]:
            raise SegmentError("chain span must precede body span")
        if lo < prev_end:
            raise SegmentError("verdict spans must be ordered and non-overlapping")
        prev_end = hi


# -- stitching ----------------------------------------------------------------


@dataclass
class _Placed:
    start: int
    end: int
    chain: tuple[int, int] | None
    body: tuple[int, int]
    is_hadith: bool
    confidence: float
    completeness: int
    interiority: int


def _place(span: VerdictSpan, offset: int, win_span: tuple[int, int], stream: PageStream) -> _Placed:
    chain = (span.chain[0] + offset, span.chain[1] + offset) if span.chain is not None else None
    body = (span.body[0] + offset, span.body[1] + offset)
    start = chain[0] if chain is not None else body[0]
    end = max(body[1], chain[1] if chain is not None else 0)
    win_start, win_end = win_span
    text = stream.text
    first_nonws = win_start
    while first_nonws < win_end and text[first_nonws].isspace():
        first_nonws += 1
    last_nonws = win_end
    while last_nonws > win_start and text[last_nonws - 1].isspace():
        last_nonws -= 1
    head_ok = start > first_nonws or win_start == 0 or markers.starts_with_opener(text[start:end])
    tail_ok = end < last_nonws or win_end == len(text)
    return _Placed(
        start=start,
        end=end,
        chain=chain,
        body=body,
        is_hadith=span.is_hadith,
        confidence=span.confidence,
        completeness=int(head_ok) + int(tail_ok),
        interiority=min(start - win_start, win_end - end),
    )


def _stitch(placed: list[_Placed]) -> list[tuple[_Placed, bool]]:
    """Resolve overlapping window views; returns (span, conflict_flag) pairs."""
    if not placed:
        return []
    placed = sorted(placed, key=lambda p: (p.start, p.end))
    out: list[tuple[_Placed, bool]] = []
    cluster: list[_Placed] = []

    def resolve(group: list[_Placed]) -> None:
        best: dict[tuple, _Placed] = {}
        for p in group:
            key = (p.start, p.end, p.is_hadith)
            cur = best.get(key)
            if cur is None or (p.completeness, p.interiority) > (cur.completeness, cur.interiority):
                best[key] = p
        candidates = list(best.values())
        # Rank: untruncated beats truncated; a narration claim beats a
        # plain-text claim (only the window that saw the opener can know
        # the span is a narration body; a window starting mid-narration
        # sees bare text); then the more interior, then the longer view.
        rank = lambda p: (p.completeness, p.is_hadith, p.interiority, p.end - p.start)
        top = max(rank(p) for p in candidates)
        winners = [p for p in candidates if rank(p) == top]
        conflict = len(winners) > 1
        if conflict:
            logger.warning("irreconcilable overlapping spans kept: %d candidates", len(winners))
        for w in sorted(winners, key=lambda p: (p.start, p.end)):
            out.append((w, conflict))

    for p in placed:
        if cluster and p.start < max(c.end for c in cluster):
            cluster.append(p)
        else:
            if cluster:
                resolve(cluster)
            cluster = [p]
    if cluster:
        resolve(cluster)
    out.sort(key=lambda pair: (pair[0].start, pair[0].end))
    return out


def segment_book(
    book: SourceBook,
    backend,
    window_units: int = DEFAULT_WINDOW_UNITS,
    overlap_units: int = DEFAULT_OVERLAP_UNITS,
    max_unit_chars: int = DEFAULT_MAX_UNIT_CHARS,
    only_windows: set[tuple[int, int]] | None = None,
) -> SegmentResult:
    """Segment one book into narration records.

    ``only_windows`` restricts the run to specific (first_unit, last_unit)
    windows — used to retry previously-unresolved windows.
    """
    stream = PageStream(book)
    units = unitize(stream, max_unit_chars=max_unit_chars)
    windows = make_windows(len(units), window_units, overlap_units)
    placed: list[_Placed] = []
    unresolved: list[UnresolvedWindow] = []
    n_run = 0
    for window in windows:
        if only_windows is not None and (window.first_unit, window.last_unit) not in only_windows:
            continue
        n_run += 1
        w_start = units[window.first_unit].start
        w_end = units[window.last_unit].end
        text = stream.text[w_start:w_end]
        try:
            verdict = backend.segment(text)
            validate_verdict(verdict, len(text))
        except SegmentError as exc:
            unresolved.append(UnresolvedWindow(book.book_id, window.first_unit, window.last_unit, str(exc)))
            continue
        if not verdict.spans and text.strip():
            unresolved.append(
                UnresolvedWindow(book.book_id, window.first_unit, window.last_unit,
                                 "empty verdict on non-empty window")
            )
            continue
        for span in verdict.spans:
            placed.append(_place(span, w_start, (w_start, w_end), stream))

    narrations = []
    for p, conflict in _stitch(placed):
        narrations.append(_materialize(p, conflict, stream))
    return SegmentResult(narrations=narrations, unresolved=unresolved,
                         n_units=len(units), n_windows=n_run)


def _materialize(p: _Placed, conflict: bool, stream: PageStream) -> Narration:
    text = stream.text
    chain_text = text[p.chain[0]:p.chain[1]] if p.chain is not None else ""
    body_text = text[p.body[0]:p.body[1]]
    flags = []
    if not p.is_hadith:
        flags.append(QcFlag.NON_HADITH_SUSPECT)
    if conflict or p.completeness < 2 or p.confidence <= FRAGMENT_CONFIDENCE:
        flags.append(QcFlag.TRUNCATION_SUSPECT)
    page_start, page_end = stream.span_pages(p.start, p.end)
    return Narration(
        narration_id=narration_id(stream.book_id, page_start, p.start, chain_text, body_text),
        book_id=stream.book_id,
        page_start=page_start,
        page_end=page_end,
        char_start=p.start,
        char_end=p.end,
        chain=chain_text,
        text=body_text,
        qc_flags=flags,
        segment_confidence=p.confidence,
    )
