import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcorpus import markers, segment
from hcorpus.annotator import AnnotationOutcome, MockAnnotator
from hcorpus.model import Category, QcFlag, SourceBook, SourcePage
from hcorpus.segment import (
    AnnotatorBackend,
    RuleBackend,
    SegmentError,
    SegmenterVerdict,
    VerdictSpan,
    make_windows,
    segment_book,
    unitize,
    validate_verdict,
)
from hcorpus.stream import PageStream
from hcorpus.synth import make_gold_corpus


def make_book(*page_texts, book_id="b1"):
    pages = [
        SourcePage(page_no=i + 1, raw_text=t, normalized_text=t)
        for i, t in enumerate(page_texts)
    ]
    return SourceBook(book_id=book_id, title="t", category=Category.HADITH, pages=pages)


# -- unitize -------------------------------------------------------------------


def test_unitize_tiles_stream():
    book = make_book("اول. ثاني. ثالث.", "رابع. خامس.")
    stream = PageStream(book)
    units = unitize(stream)
    assert "".join(u.text for u in units) == stream.text
    assert [u.unit_index for u in units] == list(range(len(units)))
    for u in units:
        assert stream.text[u.start:u.end] == u.text


def test_unitize_seam_clings_to_previous_page():
    book = make_book("اول.", "ثاني.")
    stream = PageStream(book)
    units = unitize(stream)
    assert [u.page_no for u in units] == [1, 2]
    assert units[0].text == "اول.\n"  # seam carried by page 1's last unit
    assert units[1].text == "ثاني."


def test_unitize_never_crosses_pages():
    gold = make_gold_corpus(n_books=1, narrations_per_book=15)
    stream = PageStream(gold.books[0])
    for u in unitize(stream):
        assert stream.page_at(u.start) == u.page_no
        # everything but a trailing seam char lies on the unit's page
        last_owned = u.end - 1
        if stream.text[last_owned] == "\n":
            last_owned -= 1
        assert stream.page_at(last_owned) == u.page_no


def test_unitize_splits_overlong_runs():
    long_words = " ".join(["كلمة"] * 40) + "."
    book = make_book(long_words)
    units = unitize(PageStream(book), max_unit_chars=30)
    assert len(units) > 1
    assert all(len(u.text) <= 30 for u in units)
    assert "".join(u.text for u in units) == long_words
    # splits land on whitespace when any exists inside the limit
    assert all(u.text.endswith(" ") for u in units[:-1])


def test_unitize_hard_cuts_indivisible_runs():
    solid = "ب" * 25
    units = unitize(PageStream(make_book(solid)), max_unit_chars=10)
    assert [len(u.text) for u in units] == [10, 10, 5]


def test_unitize_rejects_bad_limit():
    with pytest.raises(SegmentError, match="max_unit_chars"):
        unitize(PageStream(make_book("نص.")), max_unit_chars=0)


@settings(max_examples=100)
@given(
    st.lists(st.text(alphabet="اب ج.", min_size=1, max_size=60), min_size=1, max_size=4),
    st.integers(min_value=3, max_value=12),
)
def test_unitize_tiling_property(texts, limit):
    book = make_book(*texts)
    stream = PageStream(book)
    units = unitize(stream, max_unit_chars=limit)
    assert "".join(u.text for u in units) == stream.text
    prev_end = 0
    for u in units:
        assert u.start == prev_end
        assert u.end > u.start
        assert u.end - u.start <= limit + 1  # +1 for a trailing page seam
        prev_end = u.end
    assert prev_end == len(stream.text)
    assert [u.page_no for u in units] == sorted(u.page_no for u in units)


# -- make_windows --------------------------------------------------------------


def test_make_windows_single_window_when_short():
    assert make_windows(5, window_units=8, overlap_units=2) == [segment.Window(0, 4)]
    assert make_windows(8, window_units=8, overlap_units=2) == [segment.Window(0, 7)]


def test_make_windows_empty():
    assert make_windows(0) == []


def test_make_windows_strides_and_covers():
    windows = make_windows(20, window_units=6, overlap_units=2)
    assert windows[0].first_unit == 0
    assert windows[-1].last_unit == 19
    covered = set()
    for w in windows:
        covered.update(range(w.first_unit, w.last_unit + 1))
    assert covered == set(range(20))
    for prev, nxt in zip(windows, windows[1:]):
        assert nxt.first_unit == prev.first_unit + 4  # stride = window - overlap
        assert prev.last_unit - nxt.first_unit + 1 >= 2  # overlap preserved


@pytest.mark.parametrize("window,overlap", [(1, 0), (0, 0), (4, 0), (4, 4), (4, 5)])
def test_make_windows_rejects_bad_shape(window, overlap):
    with pytest.raises(SegmentError, match="window_units"):
        make_windows(10, window_units=window, overlap_units=overlap)


@settings(max_examples=100)
@given(
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=2, max_value=15),
    st.data(),
)
def test_make_windows_property(n_units, window_units, data):
    overlap = data.draw(st.integers(min_value=1, max_value=window_units - 1))
    windows = make_windows(n_units, window_units, overlap)
    assert windows[0].first_unit == 0
    assert windows[-1].last_unit == n_units - 1
    for w in windows:
        assert 0 <= w.first_unit <= w.last_unit < n_units
        assert w.last_unit - w.first_unit + 1 <= window_units
    for prev, nxt in zip(windows, windows[1:]):
        assert nxt.first_unit == prev.first_unit + (window_units - overlap)
        assert nxt.first_unit <= prev.last_unit  # consecutive windows overlap


# -- backends ------------------------------------------------------------------


def test_rule_backend_matches_marker_grammar():
    text = "باب الادب. حدثنا زيد قال: الاول. حدثنا عمرو قال: الثاني."
    verdict = RuleBackend().segment(text)
    expected = markers.parse_window(text)
    assert len(verdict.spans) == len(expected)
    for got, want in zip(verdict.spans, expected):
        assert got.chain == want.chain
        assert got.body == want.body
        assert got.is_hadith == want.is_hadith
        assert got.confidence == want.confidence


def test_annotator_backend_round_trips_mock():
    text = "حدثنا زيد قال: الكلام الاول. باب العلم."
    rule = RuleBackend().segment(text)
    remote = AnnotatorBackend(MockAnnotator()).segment(text)
    assert [
        (s.chain, s.body, s.is_hadith, s.confidence) for s in remote.spans
    ] == [(s.chain, s.body, s.is_hadith, s.confidence) for s in rule.spans]


class _StubClient:
    def __init__(self, outcome):
        self.outcome = outcome

    def annotate(self, request):
        return self.outcome


def test_annotator_backend_failure_raises():
    backend = AnnotatorBackend(_StubClient(AnnotationOutcome(ok=False, error="boom")))
    with pytest.raises(SegmentError, match="boom"):
        backend.segment("حدثنا زيد قال: نص.")


@pytest.mark.parametrize(
    "output",
    ["not json", "{}", '{"spans": [{"body": [0, 4]}]}', '{"spans": [{"chain": null, "body": 5, "is_hadith": true, "confidence": 1}]}'],
)
def test_annotator_backend_malformed_verdicts(output):
    backend = AnnotatorBackend(_StubClient(AnnotationOutcome(ok=True, output=output)))
    with pytest.raises(SegmentError, match="malformed segmentation verdict"):
        backend.segment("حدثنا زيد قال: نص.")


# -- verdict validation ---------------------------------------------------------


def _span(chain, body, is_hadith=True, confidence=1.0):
    return VerdictSpan(chain=chain, body=body, is_hadith=is_hadith, confidence=confidence)


def test_validate_verdict_accepts_ordered_spans():
    verdict = SegmenterVerdict(spans=[_span((0, 4), (6, 10)), _span(None, (11, 15), is_hadith=False)])
    validate_verdict(verdict, 20)  # should not raise


def test_validate_verdict_rejects_out_of_bounds():
    with pytest.raises(SegmentError, match="out of window bounds"):
        validate_verdict(SegmenterVerdict(spans=[_span((0, 4), (6, 25))]), 20)
    with pytest.raises(SegmentError, match="out of window bounds"):
        validate_verdict(SegmenterVerdict(spans=[_span((-1, 4), (6, 10))]), 20)


def test_validate_verdict_rejects_overlap():
    verdict = SegmenterVerdict(spans=[_span((0, 4), (6, 12)), _span((8, 10), (11, 15))])
    with pytest.raises(SegmentError, match="ordered and non-overlapping"):
        validate_verdict(verdict, 20)


def test_validate_verdict_rejects_chain_after_body():
    with pytest.raises(SegmentError, match="chain span must precede body"):
        validate_verdict(SegmenterVerdict(spans=[_span((6, 10), (0, 4))]), 20)


# -- segment_book ---------------------------------------------------------------


def _recovered_spans(result):
    return {
        (n.char_start, n.char_end)
        for n in result.narrations
        if QcFlag.NON_HADITH_SUSPECT not in n.qc_flags
    }


def test_segment_book_recovers_gold_spans():
    gold = make_gold_corpus(n_books=1, narrations_per_book=20)
    book = gold.books[0]
    result = segment_book(book, RuleBackend())
    want = {(g.char_start, g.char_end) for g in gold.narrations if g.book_id == book.book_id}
    assert _recovered_spans(result) == want
    assert result.unresolved == []
    # no duplicate spans survive the overlapping windows
    spans = [(n.char_start, n.char_end) for n in result.narrations]
    assert len(spans) == len(set(spans))


def test_segment_book_gold_chain_and_body_text():
    gold = make_gold_corpus(n_books=1, narrations_per_book=12)
    book = gold.books[0]
    by_span = {
        (g.char_start, g.char_end): g for g in gold.narrations if g.book_id == book.book_id
    }
    result = segment_book(book, RuleBackend())
    hadith = [n for n in result.narrations if QcFlag.NON_HADITH_SUSPECT not in n.qc_flags]
    assert len(hadith) == len(by_span)
    for n in hadith:
        g = by_span[(n.char_start, n.char_end)]
        assert n.chain == g.chain
        assert n.text == g.text
        assert (n.page_start, n.page_end) == (g.page_start, g.page_end)
        assert n.qc_flags == []
        assert n.book_id == book.book_id


def test_segment_book_small_windows_still_dedupe():
    gold = make_gold_corpus(n_books=1, narrations_per_book=12)
    book = gold.books[0]
    result = segment_book(book, RuleBackend(), window_units=5, overlap_units=2)
    want = {(g.char_start, g.char_end) for g in gold.narrations if g.book_id == book.book_id}
    assert _recovered_spans(result) == want


def test_segment_book_flags_filler_as_non_hadith():
    gold = make_gold_corpus(n_books=1, narrations_per_book=12)
    book = gold.books[0]
    result = segment_book(book, RuleBackend())
    filler_spans = {
        (n.char_start, n.char_end)
        for n in result.narrations
        if QcFlag.NON_HADITH_SUSPECT in n.qc_flags
    }
    assert filler_spans == {(s, e) for _, s, e in gold.fillers}


def test_segment_book_flags_chain_only_fragment():
    book = make_book("حدثنا محمد بن علي عن ابيه")
    result = segment_book(book, RuleBackend())
    assert len(result.narrations) == 1
    n = result.narrations[0]
    assert QcFlag.TRUNCATION_SUSPECT in n.qc_flags
    assert n.segment_confidence == pytest.approx(0.3)
    assert n.text == ""


class _FlakyBackend:
    """Fails the given call indices, then delegates."""

    name = "flaky"

    def __init__(self, fail_calls):
        self.inner = RuleBackend()
        self.fail_calls = set(fail_calls)
        self.calls = 0

    def segment(self, window_text):
        idx = self.calls
        self.calls += 1
        if idx in self.fail_calls:
            raise SegmentError("transient backend failure")
        return self.inner.segment(window_text)


def test_segment_book_queues_failed_windows():
    gold = make_gold_corpus(n_books=1, narrations_per_book=20)
    book = gold.books[0]
    result = segment_book(book, _FlakyBackend({1}))
    assert len(result.unresolved) == 1
    pending = result.unresolved[0]
    assert pending.book_id == book.book_id
    assert pending.reason == "transient backend failure"

    retry = segment_book(
        book,
        RuleBackend(),
        only_windows={(pending.first_unit, pending.last_unit)},
    )
    assert retry.n_windows == 1
    assert retry.unresolved == []
    assert retry.narrations  # the retried window yields spans again


class _EmptyBackend:
    name = "empty"

    def segment(self, window_text):
        return SegmenterVerdict(spans=[])


def test_segment_book_empty_verdict_is_unresolved():
    book = make_book("حدثنا زيد قال: نص اول. حدثنا عمرو قال: نص ثان.")
    result = segment_book(book, _EmptyBackend())
    assert result.narrations == []
    assert len(result.unresolved) == result.n_windows == 1
    assert result.unresolved[0].reason == "empty verdict on non-empty window"


def test_segment_book_ids_are_unique_and_stable():
    gold = make_gold_corpus(n_books=1, narrations_per_book=15)
    book = gold.books[0]
    first = segment_book(book, RuleBackend())
    second = segment_book(book, RuleBackend())
    ids = [n.narration_id for n in first.narrations]
    assert len(ids) == len(set(ids))
    assert ids == [n.narration_id for n in second.narrations]
