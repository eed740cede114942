import pytest

from hcorpus.annotator import AnnotationOutcome, MockAnnotator, Task
from hcorpus.enrich import (
    FIXED_TIMESTAMP,
    EnrichStats,
    Enricher,
    qc_validate,
)
from hcorpus.model import EnrichmentBundle, Narration, QcFlag
from hcorpus.normalize import strip_marks
from hcorpus.store import RecordStore

VOCAB = ("فقه", "ادب", "عقيدة", "رقائق")


def make_narration(i, chain="حدثنا زيد عن عمرو قال", text="الكلمة الطيبة صدقة والعلم نور."):
    return Narration(
        narration_id="n%03d" % i,
        book_id="b1",
        page_start=1,
        page_end=1,
        char_start=0,
        char_end=max(1, len(chain) + len(text) + 2),
        chain=chain,
        text=text,
    )


def make_enricher(client=None, languages=("en", "fa")):
    return Enricher(
        client=client or MockAnnotator(tag_vocabulary=VOCAB),
        languages=languages,
        tag_vocabulary=VOCAB,
    )


# -- qc_validate ---------------------------------------------------------------


def test_qc_diacritize_skeleton():
    assert qc_validate(Task.DIACRITIZE, "كتب", "كَتَبَ") == []
    assert qc_validate(Task.DIACRITIZE, "كتب", "كَتَ") == ["skeleton mismatch"]


def test_qc_translate_empty():
    assert qc_validate(Task.TRANSLATE, "نص", "", language="en") == ["empty output"]
    assert qc_validate(Task.TRANSLATE, "نص", "  ", language="en") == ["empty output"]


def test_qc_translate_script_heuristic():
    flags = qc_validate(Task.TRANSLATE, "نص عربي", "نص عربي", language="en")
    assert "output script matches source script" in flags
    # Arabic-script target languages are exempt
    assert qc_validate(Task.TRANSLATE, "نص عربي", "متن عربي", language="fa") == []


def test_qc_translate_length_ratio():
    flags = qc_validate(Task.TRANSLATE, "0123456789", "x", language="en")
    assert flags == ["length ratio 0.10 outside [0.3, 3.0]"]
    assert qc_validate(Task.TRANSLATE, "abc", "abcdef", language="en") == []


def test_qc_tag_vocabulary():
    assert qc_validate(Task.TAG, "نص", "فقه\nادب", tag_vocabulary=VOCAB) == []
    assert qc_validate(Task.TAG, "نص", "فقه\nبدعة", tag_vocabulary=VOCAB) == ["unknown tag: بدعة"]
    # without a vocabulary nothing is enforced
    assert qc_validate(Task.TAG, "نص", "اي شيء") == []


def test_qc_summary_length():
    assert qc_validate(Task.SUMMARIZE, "نص طويل هنا", "نص") == []
    assert qc_validate(Task.SUMMARIZE, "نص", "نص اطول") == ["summary not shorter than input"]


def test_qc_classification_boolean():
    assert qc_validate(Task.CLASSIFY_HADITH, "نص", "true") == []
    assert qc_validate(Task.CLASSIFY_HADITH, "نص", " False ") == []
    assert qc_validate(Task.CLASSIFY_HADITH, "نص", "ربما") == ["non-boolean classification"]


# -- single-narration enrichment --------------------------------------------------


def test_enrich_fills_every_layer():
    enricher = make_enricher()
    stats = EnrichStats()
    narration = make_narration(1)
    bundle, outcome = enricher.enrich(narration, None, stats)

    assert outcome.changed
    assert outcome.new_flags == []
    assert sorted(bundle.translations) == ["en", "fa"]
    assert bundle.translations["en"].startswith("[en] ")
    assert strip_marks(bundle.diacritized_chain) == narration.chain
    assert strip_marks(bundle.diacritized_text) == narration.text
    assert bundle.summary and len(bundle.summary) < len(narration.chain) + len(narration.text) + 1
    assert bundle.key_points and 1 <= len(bundle.key_points) <= 3
    assert bundle.tags and set(bundle.tags) <= set(VOCAB)
    assert bundle.provenance["classify"].status == "ok"
    assert all(p.timestamp == FIXED_TIMESTAMP for p in bundle.provenance.values())

    # 2 translations + 2 diacritizations + summary + key points + tags + classify
    assert stats.requests == 8
    assert stats.layers_written == 8
    assert stats.failed == stats.flagged == stats.blocked == 0


def test_enrich_rerun_is_idempotent():
    enricher = make_enricher()
    stats = EnrichStats()
    narration = make_narration(1)
    bundle, _ = enricher.enrich(narration, None, stats)

    again = EnrichStats()
    bundle2, outcome = enricher.enrich(narration, bundle, again)
    assert not outcome.changed
    assert again.requests == 0
    assert bundle2.to_dict() == bundle.to_dict()


def test_enrich_empty_chain_is_skipped_not_requested():
    enricher = make_enricher()
    stats = EnrichStats()
    narration = make_narration(2, chain="", text="الكلمة الطيبة صدقة.")
    bundle, _ = enricher.enrich(narration, None, stats)
    assert bundle.diacritized_chain == ""
    assert bundle.provenance["diacritize_chain"].status == "skipped_empty"
    assert strip_marks(bundle.diacritized_text) == narration.text
    # 2 translations + 1 diacritization + summary + key points + tags + classify
    assert stats.requests == 7


def test_enrich_classify_flags_non_hadith():
    enricher = make_enricher()
    narration = make_narration(3, chain="", text="باب العلم وفضله وما جاء فيه.")
    _, outcome = enricher.enrich(narration, None, EnrichStats())
    assert QcFlag.NON_HADITH_SUSPECT in outcome.new_flags


def test_enricher_rejects_unknown_layers():
    with pytest.raises(ValueError, match="unknown enrichment layers"):
        Enricher(client=MockAnnotator(), layers=("translate", "transmogrify"))


def test_enrich_layer_subset_only_runs_those_layers():
    enricher = Enricher(
        client=MockAnnotator(tag_vocabulary=VOCAB),
        languages=("en",),
        tag_vocabulary=VOCAB,
        layers=("translate",),
    )
    stats = EnrichStats()
    bundle, _ = enricher.enrich(make_narration(4), None, stats)
    assert stats.requests == 1
    assert sorted(bundle.translations) == ["en"]
    assert bundle.diacritized_text is None
    assert bundle.summary is None


class _SkeletonBreaker:
    """Delegates to the mock but corrupts every diacritization."""

    name = "breaker"
    model_version = "breaker-1"

    def __init__(self):
        self.inner = MockAnnotator(tag_vocabulary=VOCAB)

    def annotate(self, request):
        outcome = self.inner.annotate(request)
        if request.task is Task.DIACRITIZE:
            outcome.output = outcome.output[1:]
        return outcome


def test_enrich_flags_skeleton_violations():
    enricher = make_enricher(client=_SkeletonBreaker())
    stats = EnrichStats()
    narration = make_narration(5)
    bundle, outcome = enricher.enrich(narration, None, stats)
    assert stats.flagged == 2  # chain and text diacritizations both violate
    assert bundle.provenance["diacritize_chain"].status == "flagged:skeleton mismatch"
    assert bundle.provenance["diacritize_text"].status == "flagged:skeleton mismatch"
    assert QcFlag.ANNOTATOR_ANOMALY in outcome.new_flags
    # flagged output is kept for inspection, not discarded
    assert bundle.diacritized_text


class _FailingSummarizer:
    name = "failsum"
    model_version = "failsum-1"

    def __init__(self):
        self.inner = MockAnnotator(tag_vocabulary=VOCAB)

    def annotate(self, request):
        if request.task is Task.SUMMARIZE:
            return AnnotationOutcome(
                ok=False, annotator=self.name, attempts=3, error="exhausted retries"
            )
        return self.inner.annotate(request)


def test_enrich_failed_summary_blocks_key_points():
    enricher = make_enricher(client=_FailingSummarizer())
    stats = EnrichStats()
    bundle, outcome = enricher.enrich(make_narration(6), None, stats)
    assert bundle.summary is None
    assert bundle.provenance["summarize"].status == "failed"
    assert bundle.provenance["summarize"].detail == "exhausted retries"
    assert bundle.key_points is None
    assert bundle.provenance["key_points"].status == "blocked_by:summarize"
    assert stats.failed == 1
    assert stats.blocked == 1
    assert QcFlag.ANNOTATOR_ANOMALY in outcome.new_flags


# -- whole-corpus runs --------------------------------------------------------------


def _seed_stores(tmp_path, n=4):
    narrations = RecordStore(tmp_path / "narrations.jsonl")
    bundles = RecordStore(tmp_path / "bundles.jsonl")
    for i in range(n):
        narrations.put(make_narration(i, text="الكلمة الطيبة صدقة رقم %d." % i))
    return narrations, bundles


def test_enrich_all_writes_bundles_and_stats(tmp_path):
    narrations, bundles = _seed_stores(tmp_path)
    stats = make_enricher().enrich_all(narrations, bundles)
    assert stats.narrations == 4
    assert stats.bundles_written == 4
    assert bundles.count(EnrichmentBundle.KIND) == 4
    assert stats.requests == 4 * 8
    assert stats.narrations_updated == 0  # clean run adds no flags


def test_enrich_all_rerun_issues_zero_requests(tmp_path):
    narrations, bundles = _seed_stores(tmp_path)
    make_enricher().enrich_all(narrations, bundles)
    rerun = make_enricher().enrich_all(narrations, bundles)
    assert rerun.requests == 0
    assert rerun.bundles_written == 0
    assert rerun.layers_written == 0
    assert rerun.narrations_updated == 0


def test_enrich_all_marks_anomalous_narrations(tmp_path):
    narrations, bundles = _seed_stores(tmp_path, n=2)
    stats = make_enricher(client=_SkeletonBreaker()).enrich_all(narrations, bundles)
    assert stats.narrations_updated == 2
    for record in narrations.records(Narration.KIND):
        assert QcFlag.ANNOTATOR_ANOMALY in record.qc_flags


def test_enrich_all_mock_runs_are_byte_identical(tmp_path):
    paths = []
    for run in ("one", "two"):
        root = tmp_path / run
        root.mkdir()
        narrations, bundles = _seed_stores(root)
        make_enricher().enrich_all(narrations, bundles)
        paths.append(root / "bundles.jsonl")
    assert paths[0].read_bytes() == paths[1].read_bytes()
