"""Transmission-formula grammar for narration boundary detection.

A narration opens with a transmission formula (حدثنا, أخبرنا, ...), runs
through its chain of narrators, and switches to the main text at the
chain-final قال. The primary separator form is قال followed by a colon;
when no colon form exists the last standalone قال is taken, preferring the
longest possible chain, and the span is marked low confidence. Sentences
opening with a heading word (باب, كتاب, فصل) terminate the main text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

OPENERS = ("حدثنا",  # حدثنا
           "أخبرنا",  # أخبرنا
           "اخبرنا",  # اخبرنا (alef unified)
           "حدثني",  # حدثني
           "أخبرني",  # أخبرني
           "اخبرني",  # اخبرني
           "سمعت")  # سمعت

HEADING_STARTERS = ("باب",  # باب
                    "كتاب",  # كتاب
                    "فصل")  # فصل

OPENER_RE = re.compile(r"(?<!\w)(?:%s)(?!\w)" % "|".join(OPENERS))
# قال/قالت immediately followed by a colon: the unambiguous chain/text separator.
SEPARATOR_RE = re.compile("(قالت|قال)\\s*:")
QALA_RE = re.compile("(?<!\\w)(قالت|قال)(?!\\w)")
HEADING_RE = re.compile(r"^(?:%s)(?!\w)" % "|".join(HEADING_STARTERS))

SENTENCE_END = ".!?؟؛۔…"  # . ! ? ؟ ؛ ۔ …
_SENTENCE_RE = re.compile(r"[^%s]*(?:[%s]+|\Z)\s*" % (SENTENCE_END, SENTENCE_END))

#: Canonical separator used when reconstructing a narration's source span
#: from its stored chain and text (the primary قال: form contributes ": ").
CANONICAL_SEPARATOR = ": "


@dataclass
class RawSpan:
    """One parsed span, offsets relative to the parsed text."""

    chain: tuple[int, int] | None
    body: tuple[int, int]
    is_hadith: bool
    confidence: float

    @property
    def start(self) -> int:
        return self.chain[0] if self.chain is not None else self.body[0]

    @property
    def end(self) -> int:
        return self.body[1] if self.body[1] > self.body[0] else (
            self.chain[1] if self.chain is not None else self.body[1]
        )


def sentence_spans(text: str, start: int = 0, end: int | None = None) -> list[tuple[int, int]]:
    """Tile [start, end) into sentence spans.

    Each span ends just after its final delimiter run; trailing whitespace
    is attached to the sentence it follows so the spans tile the region.
    """
    if end is None:
        end = len(text)
    spans = []
    pos = start
    while pos < end:
        m = _SENTENCE_RE.match(text, pos, end)
        if m is None or m.end() == pos:  # pragma: no cover - defensive
            spans.append((pos, end))
            break
        spans.append((pos, m.end()))
        pos = m.end()
    return spans


def starts_with_opener(text: str) -> bool:
    m = OPENER_RE.match(text.lstrip())
    return m is not None and m.start() == 0


def _trimmed(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _non_hadith_spans(text: str, start: int, end: int) -> list[RawSpan]:
    """One span per sentence of non-narration content, blanks skipped."""
    spans = []
    for s, e in sentence_spans(text, start, end):
        ts, te = _trimmed(text, s, e)
        if ts < te:
            spans.append(RawSpan(chain=None, body=(ts, te), is_hadith=False, confidence=1.0))
    return spans


def parse_window(text: str) -> list[RawSpan]:
    """Parse one window of normalized text into narration and filler spans."""
    spans: list[RawSpan] = []
    openers = [m.start() for m in OPENER_RE.finditer(text)]
    if not openers:
        return _non_hadith_spans(text, 0, len(text))

    spans.extend(_non_hadith_spans(text, 0, openers[0]))
    for i, opener in enumerate(openers):
        region_end = openers[i + 1] if i + 1 < len(openers) else len(text)
        spans.extend(_parse_candidate(text, opener, region_end))
    return spans


def _parse_candidate(text: str, start: int, region_end: int) -> list[RawSpan]:
    sep = SEPARATOR_RE.search(text, start, region_end)
    if sep is not None:
        chain_end = sep.end(1)
        body_start = sep.end()
        confidence = 1.0
    else:
        last = None
        for m in QALA_RE.finditer(text, start, region_end):
            last = m
        if last is not None:
            # Longest-chain fallback: the final standalone قال closes the chain.
            chain_end = last.end(1)
            body_start = last.end(1)
            confidence = 0.6
        else:
            # No separator at all: chain-only fragment (likely a window cut).
            _, trimmed_end = _trimmed(text, start, region_end)
            return [RawSpan(chain=(start, trimmed_end), body=(trimmed_end, trimmed_end),
                            is_hadith=True, confidence=0.3)]

    while body_start < region_end and text[body_start].isspace():
        body_start += 1

    body_end = body_start
    cut = None
    for s, e in sentence_spans(text, body_start, region_end):
        ts, te = _trimmed(text, s, e)
        if ts < te and HEADING_RE.match(text[ts:te]):
            cut = ts
            break
        if ts < te:
            body_end = te
    out = [RawSpan(chain=(start, chain_end), body=(body_start, body_end),
                   is_hadith=True, confidence=confidence)]
    if cut is not None:
        out.extend(_non_hadith_spans(text, cut, region_end))
    return out
