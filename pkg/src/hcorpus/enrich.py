"""Enrichment: per-narration annotation layers plus quality control.

``enrich_all`` is idempotent at layer granularity: a rerun issues requests
only for layers that are missing, so a completed corpus produces zero new
requests. Annotator outputs pass through task-specific QC; anomalous
outputs are kept but flagged, and the owning narration is marked
``annotator_anomaly``. Key points are extracted from the summary, so a
failed summary blocks key points (``blocked_by:summarize``) instead of
producing a misleading failure of its own.
"""

from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass, field

from .annotator import AnnotationRequest, AnnotatorClient, MockAnnotator, Task
from .model import EnrichmentBundle, LayerProvenance, Narration, QcFlag
from .normalize import strip_marks

logger = logging.getLogger(__name__)

DEFAULT_LANGUAGES = ("en", "fa", "tr", "ur", "fr", "es", "de", "id", "ru", "zh", "hi", "bn")
DEFAULT_LAYERS = ("translate", "diacritize", "summarize", "key_points", "tags", "classify")

#: Languages written in Arabic script; their translations are exempt from
#: the script-difference heuristic.
ARABIC_SCRIPT_LANGUAGES = frozenset({"ar", "fa", "ur", "ps", "sd", "ug"})

TRANSLATE_RATIO_BOUNDS = (0.3, 3.0)

#: Fixed timestamp used in deterministic runs so reruns are byte-identical.
FIXED_TIMESTAMP = "2000-01-01T00:00:00Z"


def utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def fixed_clock() -> str:
    return FIXED_TIMESTAMP


def _arabic_ratio(text: str) -> float:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return 0.0
    arabic = sum(1 for ch in letters if "؀" <= ch <= "ۿ")
    return arabic / len(letters)


def qc_validate(
    task: Task,
    input_text: str,
    output: str,
    language: str | None = None,
    tag_vocabulary: tuple[str, ...] | None = None,
) -> list[str]:
    """Task-specific output checks; returns flag reasons (empty = pass)."""
    flags: list[str] = []
    if task == Task.DIACRITIZE:
        if strip_marks(output) != strip_marks(input_text):
            flags.append("skeleton mismatch")
    elif task == Task.TRANSLATE:
        if not output.strip():
            flags.append("empty output")
        else:
            if language not in ARABIC_SCRIPT_LANGUAGES and _arabic_ratio(output) > 0.5:
                flags.append("output script matches source script")
            ratio = len(output) / len(input_text)
            lo, hi = TRANSLATE_RATIO_BOUNDS
            if not (lo <= ratio <= hi):
                flags.append("length ratio %.2f outside [%s, %s]" % (ratio, lo, hi))
    elif task == Task.TAG:
        if tag_vocabulary is not None:
            for tag in output.split("\n"):
                if tag and tag not in tag_vocabulary:
                    flags.append("unknown tag: %s" % tag)
    elif task == Task.SUMMARIZE:
        if len(output) >= len(input_text):
            flags.append("summary not shorter than input")
    elif task == Task.CLASSIFY_HADITH:
        if output.strip().lower() not in ("true", "false"):
            flags.append("non-boolean classification")
    return flags


@dataclass
class EnrichStats:
    narrations: int = 0
    requests: int = 0
    layers_written: int = 0
    flagged: int = 0
    failed: int = 0
    blocked: int = 0
    bundles_written: int = 0
    narrations_updated: int = 0

    def merge(self, other: "EnrichStats") -> None:
        for name in vars(other):
            setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass
class _LayerOutcome:
    changed: bool = False
    new_flags: list[QcFlag] = field(default_factory=list)


class Enricher:
    def __init__(
        self,
        client: AnnotatorClient,
        languages: tuple[str, ...] = DEFAULT_LANGUAGES,
        tag_vocabulary: tuple[str, ...] = (),
        layers: tuple[str, ...] = DEFAULT_LAYERS,
        clock=None,
    ):
        unknown = set(layers) - set(DEFAULT_LAYERS)
        if unknown:
            raise ValueError("unknown enrichment layers: %s" % sorted(unknown))
        self.client = client
        self.languages = tuple(languages)
        self.tag_vocabulary = tuple(tag_vocabulary)
        self.layers = tuple(layers)
        if clock is None:
            # Mock runs must be reproducible byte for byte.
            clock = fixed_clock if isinstance(client, MockAnnotator) else utc_now
        self.clock = clock

    # -- single narration ---------------------------------------------------

    def enrich(self, narration: Narration, bundle: EnrichmentBundle | None, stats: EnrichStats) -> tuple[EnrichmentBundle, _LayerOutcome]:
        if bundle is None:
            bundle = EnrichmentBundle(narration_id=narration.narration_id)
        outcome = _LayerOutcome()
        content = narration.chain + (" " if narration.chain and narration.text else "") + narration.text

        if "translate" in self.layers:
            for lang in sorted(self.languages):
                key = "translate:%s" % lang
                if lang in bundle.translations:
                    continue
                text = self._request(
                    bundle, key, Task.TRANSLATE, content, outcome, stats,
                    context={"language": lang}, language=lang,
                )
                if text is not None:
                    bundle.translations[lang] = text

        if "diacritize" in self.layers:
            if bundle.diacritized_chain is None:
                bundle.diacritized_chain = self._diacritize_part(
                    bundle, "diacritize_chain", narration.chain, outcome, stats
                )
            if bundle.diacritized_text is None:
                bundle.diacritized_text = self._diacritize_part(
                    bundle, "diacritize_text", narration.text, outcome, stats
                )

        if "summarize" in self.layers and bundle.summary is None:
            text = self._request(bundle, "summarize", Task.SUMMARIZE, content, outcome, stats)
            if text is not None:
                bundle.summary = text

        if "key_points" in self.layers and bundle.key_points is None:
            summary_status = bundle.provenance.get("summarize")
            if bundle.summary:
                text = self._request(bundle, "key_points", Task.KEY_POINTS, bundle.summary, outcome, stats)
                if text is not None:
                    bundle.key_points = [line for line in text.split("\n") if line.strip()]
            elif summary_status is not None and summary_status.status != "ok":
                if self._mark(bundle, "key_points", "blocked_by:summarize", outcome):
                    stats.blocked += 1
            elif bundle.summary == "":
                self._mark(bundle, "key_points", "skipped_empty", outcome)

        if "tags" in self.layers and bundle.tags is None:
            text = self._request(bundle, "tags", Task.TAG, content, outcome, stats)
            if text is not None:
                bundle.tags = [t for t in text.split("\n") if t]

        if "classify" in self.layers and "classify" not in bundle.provenance:
            text = self._request(bundle, "classify", Task.CLASSIFY_HADITH, content, outcome, stats)
            if text is not None and text.strip().lower() == "false":
                if QcFlag.NON_HADITH_SUSPECT not in narration.qc_flags:
                    outcome.new_flags.append(QcFlag.NON_HADITH_SUSPECT)

        return bundle, outcome

    def _diacritize_part(self, bundle, key, source_text, outcome, stats) -> str | None:
        if not source_text:
            self._mark(bundle, key, "skipped_empty", outcome)
            return ""
        return self._request(bundle, key, Task.DIACRITIZE, source_text, outcome, stats)

    def _mark(self, bundle, key, status, outcome, prov=None) -> bool:
        if prov is None:
            existing = bundle.provenance.get(key)
            if existing is not None and existing.status == status:
                return False  # rerun over an unchanged situation: no new work
        bundle.provenance[key] = prov or LayerProvenance(
            annotator=self.client.name,
            version=getattr(self.client, "model_version", ""),
            timestamp=self.clock(),
            attempts=0,
            status=status,
        )
        outcome.changed = True
        return True

    def _request(
        self, bundle, key, task, input_text, outcome, stats,
        context: dict | None = None, language: str | None = None,
    ) -> str | None:
        request = AnnotationRequest(task=task, input_text=input_text, context=context or {})
        result = self.client.annotate(request)
        stats.requests += 1
        prov = LayerProvenance(
            annotator=result.annotator or self.client.name,
            version=result.model_version,
            timestamp=self.clock(),
            attempts=result.attempts,
        )
        if not result.ok:
            prov.status = "failed"
            prov.detail = result.error
            stats.failed += 1
            self._mark(bundle, key, "failed", outcome, prov)
            if QcFlag.ANNOTATOR_ANOMALY not in outcome.new_flags:
                outcome.new_flags.append(QcFlag.ANNOTATOR_ANOMALY)
            return None
        reasons = qc_validate(task, input_text, result.output, language=language,
                              tag_vocabulary=self.tag_vocabulary or None)
        if reasons:
            prov.status = "flagged:" + "; ".join(reasons)
            stats.flagged += 1
            if QcFlag.ANNOTATOR_ANOMALY not in outcome.new_flags:
                outcome.new_flags.append(QcFlag.ANNOTATOR_ANOMALY)
        self._mark(bundle, key, prov.status, outcome, prov)
        stats.layers_written += 1
        return result.output

    # -- whole corpus ---------------------------------------------------------

    def enrich_all(self, narration_store, bundle_store) -> EnrichStats:
        stats = EnrichStats()
        for narration in narration_store.records(Narration.KIND):
            stats.narrations += 1
            existing = bundle_store.get(EnrichmentBundle.KIND, narration.narration_id)
            bundle, outcome = self.enrich(narration, existing, stats)
            if outcome.changed:
                bundle_store.put(bundle)
                stats.bundles_written += 1
            added = [f for f in outcome.new_flags if f not in narration.qc_flags]
            if added:
                narration.qc_flags.extend(added)
                narration_store.put(narration)
                stats.narrations_updated += 1
        return stats
