"""Arabic text normalization.

All segmentation, alignment, and identity hashing operate on normalized
text; raw page text is preserved separately. Normalization applies NFC
first, then the rules enabled by the active profile. The function is
idempotent for every profile combination.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, fields

# Combining marks removed when matching: harakat, tanween, superscript
# alef, Quranic annotation marks. Kept as explicit ranges so the same set
# serves both normalization and the diacritization skeleton check.
_MARK_RANGES = (
    (0x0610, 0x061A),
    (0x064B, 0x065F),
    (0x0670, 0x0670),
    (0x06D6, 0x06DC),
    (0x06DF, 0x06E4),
    (0x06E7, 0x06E8),
    (0x06EA, 0x06ED),
)

ARABIC_MARKS = frozenset(
    chr(cp) for lo, hi in _MARK_RANGES for cp in range(lo, hi + 1)
)

_MARKS_RE = re.compile("[%s]" % "".join("%s-%s" % (chr(lo), chr(hi)) for lo, hi in _MARK_RANGES))
_TATWEEL = "ـ"
_ALEF_VARIANTS_RE = re.compile("[آأإٱ]")  # آ أ إ ٱ -> ا
_WS_RE = re.compile(r"\s+")

# Page artifacts: bracketed footnote markers (Latin or Arabic-Indic digits),
# ruler/decoration lines, and lines that are nothing but a page number.
_FOOTNOTE_MARK_RE = re.compile(r"\(\s*[0-9٠-٩]+\s*\)")
_DECORATION_LINE_RE = re.compile(r"^[\s\-_=*~.─-╿]+$")
_BARE_NUMBER_LINE_RE = re.compile(r"^\s*[0-9٠-٩]+\s*$")


@dataclass(frozen=True)
class NormalizationProfile:
    """Which normalization rules are active.

    The default profile is the matching profile used by the pipeline:
    everything on.
    """

    strip_diacritics_for_matching: bool = True
    unify_alef_variants: bool = True
    unify_ya_and_alef_maqsura: bool = True
    remove_tatweel: bool = True
    collapse_whitespace: bool = True
    strip_page_artifacts: bool = True

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationProfile":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError("unknown normalization profile keys: %s" % sorted(unknown))
        return cls(**data)


def strip_marks(text: str) -> str:
    """Remove Arabic combining marks (diacritics) only.

    This is the skeleton operation shared by the matching profile and the
    diacritization QC check.
    """
    return _MARKS_RE.sub("", text)


def _strip_page_artifacts(text: str) -> str:
    lines = []
    for line in text.split("\n"):
        if _DECORATION_LINE_RE.match(line) or _BARE_NUMBER_LINE_RE.match(line):
            continue
        lines.append(_FOOTNOTE_MARK_RE.sub("", line))
    return "\n".join(lines)


def normalize(text: str, profile: NormalizationProfile | None = None) -> str:
    """Normalize Arabic text for matching and storage.

    NFC is applied unconditionally before any profile rule. Base-letter
    order is never changed; rules only delete characters or substitute
    single characters one-for-one (whitespace collapse substitutes runs).
    """
    if profile is None:
        profile = NormalizationProfile()
    text = unicodedata.normalize("NFC", text)
    if profile.strip_page_artifacts:
        text = _strip_page_artifacts(text)
    if profile.strip_diacritics_for_matching:
        text = strip_marks(text)
    if profile.remove_tatweel:
        text = text.replace(_TATWEEL, "")
    if profile.unify_alef_variants:
        text = _ALEF_VARIANTS_RE.sub("ا", text)
    if profile.unify_ya_and_alef_maqsura:
        text = text.replace("ى", "ي")  # ى -> ي
    if profile.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    return text
