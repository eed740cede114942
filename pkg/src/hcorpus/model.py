"""Domain types for the narration corpus.

Every storable record knows its store kind, its identity key, how to
serialize itself to a JSON-able dict, and how to validate its own
invariants. Validation errors name the violated invariant so callers can
surface them verbatim.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum


class InvariantViolation(ValueError):
    """A record failed one of its type invariants."""


class Category(str, Enum):
    HADITH = "hadith"
    BIOGRAPHY = "biography"
    COMMENTARY = "commentary"
    JURISPRUDENCE = "jurisprudence"
    OTHER = "other"


class QcFlag(str, Enum):
    NON_HADITH_SUSPECT = "non_hadith_suspect"
    TRUNCATION_SUSPECT = "truncation_suspect"
    LOW_FIDELITY = "low_fidelity"
    ANNOTATOR_ANOMALY = "annotator_anomaly"


class EvaluationAspect(str, Enum):
    CHAIN_TEXT_SEPARATION = "chain_text_separation"
    SUMMARIZATION = "summarization"
    GROUPING = "grouping"
    ANALYTICAL_COMMENTARY = "analytical_commentary"
    THEMATIC_TAGGING = "thematic_tagging"
    KEY_POINTS = "key_points"
    THEMATIC_SIMILARITY = "thematic_similarity"
    LEXICAL_SIMILARITY = "lexical_similarity"
    SEMANTIC_SIMILARITY = "semantic_similarity"


class ErrorDimension(str, Enum):
    TYPOS = "typos"
    TRANSLATION = "translation"
    MISSING_WORDS = "missing_words"
    TAGGING = "tagging"
    KEY_PHRASES = "key_phrases"
    DIACRITIZATION_CHAR = "diacritization_char"


#: Dimensions whose per-record error rate decides the critical filter.
CORE_DIMENSIONS = frozenset(
    {ErrorDimension.TRANSLATION, ErrorDimension.DIACRITIZATION_CHAR, ErrorDimension.MISSING_WORDS}
)

SCHEMA_VERSION = 1

_ID_JOIN = "\x1f"


def narration_id(book_id: str, page_start: int, char_start: int, chain: str, text: str) -> str:
    """Deterministic 16-hex-char identity for a narration.

    Hash of source coordinates plus normalized content; stable across runs
    and platforms.
    """
    payload = _ID_JOIN.join([book_id, str(page_start), str(char_start), chain, text])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class SourcePage:
    page_no: int
    raw_text: str
    normalized_text: str

    def to_dict(self) -> dict:
        return {
            "page_no": self.page_no,
            "raw_text": self.raw_text,
            "normalized_text": self.normalized_text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourcePage":
        return cls(d["page_no"], d["raw_text"], d["normalized_text"])


@dataclass
class SourceBook:
    KIND = "book"

    book_id: str
    title: str
    category: Category
    pages: list[SourcePage] = field(default_factory=list)
    reclassified: bool = False

    def record_key(self) -> str:
        return self.book_id

    def validate(self) -> None:
        if not self.book_id:
            raise InvariantViolation("book_id must be non-empty")
        if not self.pages:
            raise InvariantViolation("a book must contain at least one page")
        nos = [p.page_no for p in self.pages]
        if any(n < 1 for n in nos):
            raise InvariantViolation("page numbers start at 1")
        if any(b <= a for a, b in zip(nos, nos[1:])):
            raise InvariantViolation("page numbers must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "book_id": self.book_id,
            "title": self.title,
            "category": self.category.value,
            "pages": [p.to_dict() for p in self.pages],
            "reclassified": self.reclassified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceBook":
        return cls(
            book_id=d["book_id"],
            title=d["title"],
            category=Category(d["category"]),
            pages=[SourcePage.from_dict(p) for p in d["pages"]],
            reclassified=d.get("reclassified", False),
        )


@dataclass
class Narration:
    KIND = "narration"

    narration_id: str
    book_id: str
    page_start: int
    page_end: int
    char_start: int
    char_end: int
    chain: str
    text: str
    fidelity: float | None = None
    qc_flags: list[QcFlag] = field(default_factory=list)
    group_id: str | None = None
    segment_confidence: float | None = None

    def record_key(self) -> str:
        return self.narration_id

    def validate(self) -> None:
        if not self.narration_id:
            raise InvariantViolation("narration_id must be non-empty")
        if self.page_start < 1:
            raise InvariantViolation("page_start must be >= 1")
        if self.page_end < self.page_start:
            raise InvariantViolation("page_start <= page_end must hold")
        if self.char_start < 0:
            raise InvariantViolation("char_start must be >= 0")
        if self.char_end <= self.char_start:
            raise InvariantViolation("char_start < char_end must hold")
        if self.fidelity is not None and not (0.0 <= self.fidelity <= 1.0):
            raise InvariantViolation("fidelity must lie within [0, 1]")
        if len(set(self.qc_flags)) != len(self.qc_flags):
            raise InvariantViolation("qc_flags must not repeat")

    def to_dict(self) -> dict:
        return {
            "narration_id": self.narration_id,
            "book_id": self.book_id,
            "page_start": self.page_start,
            "page_end": self.page_end,
            "char_start": self.char_start,
            "char_end": self.char_end,
            "chain": self.chain,
            "text": self.text,
            "fidelity": self.fidelity,
            "qc_flags": [f.value for f in self.qc_flags],
            "group_id": self.group_id,
            "segment_confidence": self.segment_confidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Narration":
        return cls(
            narration_id=d["narration_id"],
            book_id=d["book_id"],
            page_start=d["page_start"],
            page_end=d["page_end"],
            char_start=d["char_start"],
            char_end=d["char_end"],
            chain=d["chain"],
            text=d["text"],
            fidelity=d.get("fidelity"),
            qc_flags=[QcFlag(f) for f in d.get("qc_flags", [])],
            group_id=d.get("group_id"),
            segment_confidence=d.get("segment_confidence"),
        )


@dataclass
class LayerProvenance:
    annotator: str
    version: str
    timestamp: str
    attempts: int
    status: str = "ok"  # ok | failed | flagged:<reason> | blocked_by:<layer> | skipped_empty
    detail: str | None = None

    def to_dict(self) -> dict:
        return {
            "annotator": self.annotator,
            "version": self.version,
            "timestamp": self.timestamp,
            "attempts": self.attempts,
            "status": self.status,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayerProvenance":
        return cls(
            d["annotator"], d["version"], d["timestamp"], d["attempts"],
            d.get("status", "ok"), d.get("detail"),
        )


@dataclass
class EnrichmentBundle:
    KIND = "bundle"

    narration_id: str
    translations: dict[str, str] = field(default_factory=dict)
    diacritized_chain: str | None = None
    diacritized_text: str | None = None
    summary: str | None = None
    key_points: list[str] | None = None
    tags: list[str] | None = None
    provenance: dict[str, LayerProvenance] = field(default_factory=dict)

    def record_key(self) -> str:
        return self.narration_id

    def validate(self, languages: list[str] | None = None, tag_vocabulary: list[str] | None = None) -> None:
        if not self.narration_id:
            raise InvariantViolation("narration_id must be non-empty")
        if languages is not None:
            extra = set(self.translations) - set(languages)
            if extra:
                raise InvariantViolation(
                    "translation keys must be a subset of the configured languages; unknown: %s"
                    % sorted(extra)
                )
        if tag_vocabulary is not None and self.tags:
            unknown = set(self.tags) - set(tag_vocabulary)
            if unknown:
                raise InvariantViolation(
                    "tags must be drawn from the configured vocabulary; unknown: %s" % sorted(unknown)
                )

    def to_dict(self) -> dict:
        return {
            "narration_id": self.narration_id,
            "translations": dict(sorted(self.translations.items())),
            "diacritized_chain": self.diacritized_chain,
            "diacritized_text": self.diacritized_text,
            "summary": self.summary,
            "key_points": self.key_points,
            "tags": self.tags,
            "provenance": {k: v.to_dict() for k, v in sorted(self.provenance.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnrichmentBundle":
        return cls(
            narration_id=d["narration_id"],
            translations=dict(d.get("translations", {})),
            diacritized_chain=d.get("diacritized_chain"),
            diacritized_text=d.get("diacritized_text"),
            summary=d.get("summary"),
            key_points=d.get("key_points"),
            tags=d.get("tags"),
            provenance={k: LayerProvenance.from_dict(v) for k, v in d.get("provenance", {}).items()},
        )


@dataclass
class EvaluationRecord:
    KIND = "evaluation"

    narration_id: str
    evaluator_id: str
    aspect_scores: dict[EvaluationAspect, float] = field(default_factory=dict)
    error_counts: dict[ErrorDimension, tuple[int, int]] = field(default_factory=dict)
    is_non_hadith: bool = False
    root_cause_links: dict[ErrorDimension, ErrorDimension] = field(default_factory=dict)
    free_notes: str = ""

    def record_key(self) -> str:
        return "%s:%s" % (self.narration_id, self.evaluator_id)

    def validate(self) -> None:
        if not self.narration_id:
            raise InvariantViolation("narration_id must be non-empty")
        if not self.evaluator_id:
            raise InvariantViolation("evaluator_id must be non-empty")
        for aspect, score in self.aspect_scores.items():
            if not (0.0 <= score <= 10.0):
                raise InvariantViolation(
                    "aspect scores must lie within [0, 10]; %s=%r" % (aspect.value, score)
                )
        for dim, (errors, total) in self.error_counts.items():
            if total <= 0:
                raise InvariantViolation(
                    "error_counts total_units must be positive; %s has total %r" % (dim.value, total)
                )
            if errors < 0 or errors > total:
                raise InvariantViolation(
                    "error_units must lie within [0, total_units]; %s has %r/%r"
                    % (dim.value, errors, total)
                )
        # root_cause_links must be acyclic (walk each chain with a visited set)
        for start in self.root_cause_links:
            seen = {start}
            cur = start
            while cur in self.root_cause_links:
                cur = self.root_cause_links[cur]
                if cur in seen:
                    raise InvariantViolation("root_cause_links must be acyclic")
                seen.add(cur)

    def to_dict(self) -> dict:
        return {
            "narration_id": self.narration_id,
            "evaluator_id": self.evaluator_id,
            "aspect_scores": {a.value: s for a, s in sorted(self.aspect_scores.items())},
            "error_counts": {d.value: list(c) for d, c in sorted(self.error_counts.items())},
            "is_non_hadith": self.is_non_hadith,
            "root_cause_links": {d.value: r.value for d, r in sorted(self.root_cause_links.items())},
            "free_notes": self.free_notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationRecord":
        return cls(
            narration_id=d["narration_id"],
            evaluator_id=d["evaluator_id"],
            aspect_scores={EvaluationAspect(a): float(s) for a, s in d.get("aspect_scores", {}).items()},
            error_counts={
                ErrorDimension(k): (int(v[0]), int(v[1])) for k, v in d.get("error_counts", {}).items()
            },
            is_non_hadith=bool(d.get("is_non_hadith", False)),
            root_cause_links={
                ErrorDimension(k): ErrorDimension(v)
                for k, v in d.get("root_cause_links", {}).items()
            },
            free_notes=d.get("free_notes", ""),
        )


@dataclass
class UnresolvedWindow:
    """A segmentation window whose backend verdict could not be used.

    Kept in the store so a later run can retry it; never silently dropped.
    """

    KIND = "unresolved_window"

    book_id: str
    first_unit: int
    last_unit: int
    reason: str
    resolved: bool = False

    def record_key(self) -> str:
        return "%s:%d-%d" % (self.book_id, self.first_unit, self.last_unit)

    def validate(self) -> None:
        if self.last_unit < self.first_unit:
            raise InvariantViolation("first_unit <= last_unit must hold")

    def to_dict(self) -> dict:
        return {
            "book_id": self.book_id,
            "first_unit": self.first_unit,
            "last_unit": self.last_unit,
            "reason": self.reason,
            "resolved": self.resolved,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnresolvedWindow":
        return cls(d["book_id"], d["first_unit"], d["last_unit"], d["reason"], d.get("resolved", False))


RECORD_TYPES = {
    SourceBook.KIND: SourceBook,
    Narration.KIND: Narration,
    EnrichmentBundle.KIND: EnrichmentBundle,
    EvaluationRecord.KIND: EvaluationRecord,
    UnresolvedWindow.KIND: UnresolvedWindow,
}
