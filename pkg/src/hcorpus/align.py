"""Fuzzy alignment of narrations against their source books.

Fidelity is normalized edit-distance similarity: ``1 - lev(a, b) /
max(len(a), len(b))``. Locating a narration scans the page stream with a
coarse sliding window (query length plus 15% slack, stride 32) and then
refines locally to exact character boundaries. Distances use Myers'
bit-parallel algorithm over Python integers, which keeps the scan fast
without leaving pure Python; a plain DP matrix would give identical
results (the tests hold it to that).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

DEFAULT_MIN_FIDELITY = 0.80
DEFAULT_SLACK_RATIO = 0.15
DEFAULT_STRIDE = 32


def levenshtein(a: str, b: str) -> int:
    """Exact edit distance (insert / delete / substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    # Myers/Hyyrö bit-parallel scan: pattern = b (bitmasks), text = a.
    m = len(b)
    peq: dict[str, int] = {}
    for i, ch in enumerate(b):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    mask = 1 << (m - 1)
    full = (1 << m) - 1
    pv = full
    mv = 0
    score = m
    for ch in a:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & mask:
            score += 1
        elif mh & mask:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = (mh | (~(xv | ph) & full))
        mv = ph & xv
    return score


def similarity(a: str, b: str) -> float:
    """Normalized similarity in [0, 1]; two empty strings are identical."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def _semi_global_scores(pattern: str, text: str) -> list[int]:
    """scores[j] = min edit distance of pattern vs any text slice ending at j+1.

    Semi-global variant of the bit-parallel scan: starting anywhere in the
    text is free, the whole pattern must be consumed.
    """
    m = len(pattern)
    peq: dict[str, int] = {}
    for i, ch in enumerate(pattern):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    mask = 1 << (m - 1)
    full = (1 << m) - 1
    pv = full
    mv = 0
    score = m
    scores = []
    for ch in text:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & mask:
            score += 1
        elif mh & mask:
            score -= 1
        ph = (ph << 1) & full  # no carry-in: text prefix is free
        mh = (mh << 1) & full
        pv = (mh | (~(xv | ph) & full))
        mv = ph & xv
        scores.append(score)
    return scores


@dataclass
class AlignmentResult:
    found: bool
    fidelity: float
    page_start: int | None = None
    page_end: int | None = None
    char_start: int | None = None
    char_end: int | None = None
    edit_ops: dict[str, int] = field(default_factory=dict)  # insert/delete/substitute


def edit_ops_summary(a: str, b: str) -> dict[str, int]:
    """Counts of each edit operation turning ``a`` into ``b``.

    Full DP with deterministic traceback (match > substitute > delete >
    insert). Only used on already-located spans, so quadratic cost is fine.
    """
    n, m = len(a), len(b)
    prev = list(range(m + 1))
    rows = [prev]
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j - 1] + cost, prev[j] + 1, cur[j - 1] + 1)
        rows.append(cur)
        prev = cur
    ops = {"insert": 0, "delete": 0, "substitute": 0}
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and rows[i][j] == rows[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1):
            if a[i - 1] != b[j - 1]:
                ops["substitute"] += 1
            i -= 1
            j -= 1
        elif i > 0 and rows[i][j] == rows[i - 1][j] + 1:
            ops["delete"] += 1
            i -= 1
        else:
            ops["insert"] += 1
            j -= 1
    return ops


def locate(
    query: str,
    stream_text: str,
    min_fidelity: float = DEFAULT_MIN_FIDELITY,
    slack_ratio: float = DEFAULT_SLACK_RATIO,
    stride: int = DEFAULT_STRIDE,
) -> AlignmentResult:
    """Best-fidelity window for ``query`` in ``stream_text``.

    Coarse scan with fixed-width windows (query length + slack), then a
    local semi-global refinement around the best coarse position pins the
    exact start and end. The effective stride never exceeds slack + 1, so
    some coarse window always contains the true span.
    """
    if not query or not stream_text:
        return AlignmentResult(found=False, fidelity=0.0)

    n = len(query)
    mlen = len(stream_text)
    slack = max(4, math.ceil(n * slack_ratio))
    width = min(mlen, n + slack)

    if width >= mlen:
        region_lo, region_hi = 0, mlen
    else:
        step = max(1, min(stride, slack + 1))
        starts = list(range(0, mlen - width + 1, step))
        if starts[-1] != mlen - width:
            starts.append(mlen - width)
        best_pos, best_d = starts[0], None
        for pos in starts:
            d = levenshtein(query, stream_text[pos:pos + width])
            if best_d is None or d < best_d:
                best_pos, best_d = pos, d
        region_lo = max(0, best_pos - step - slack)
        region_hi = min(mlen, best_pos + width + step + slack)

    region = stream_text[region_lo:region_hi]
    fwd = _semi_global_scores(query, region)
    end_rel = min(range(len(fwd)), key=lambda j: (fwd[j], j)) + 1
    rev = _semi_global_scores(query[::-1], region[:end_rel][::-1])
    start_rel = end_rel - (min(range(len(rev)), key=lambda j: (rev[j], j)) + 1)

    char_start = region_lo + start_rel
    char_end = region_lo + end_rel
    span = stream_text[char_start:char_end]
    fidelity = similarity(query, span)
    if fidelity < min_fidelity:
        return AlignmentResult(found=False, fidelity=fidelity)
    return AlignmentResult(
        found=True,
        fidelity=fidelity,
        char_start=char_start,
        char_end=char_end,
        edit_ops=edit_ops_summary(query, span),
    )


def missing_words(narration_text: str, source_span: str) -> int:
    """Number of source-side words absent from the narration.

    Word-level alignment; a source word with no counterpart (a deletion in
    the source-to-narration direction) counts as missing. Substituted words
    are present-but-different, not missing.
    """
    src = source_span.split()
    dst = narration_text.split()
    n, m = len(src), len(dst)
    if n == 0:
        return 0
    prev = list(range(m + 1))
    rows = [prev]
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            cost = 0 if src[i - 1] == dst[j - 1] else 1
            cur[j] = min(prev[j - 1] + cost, prev[j] + 1, cur[j - 1] + 1)
        rows.append(cur)
        prev = cur
    missing = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and rows[i][j] == rows[i - 1][j - 1] + (0 if src[i - 1] == dst[j - 1] else 1):
            i -= 1
            j -= 1
        elif i > 0 and rows[i][j] == rows[i - 1][j] + 1:
            missing += 1  # source word dropped
            i -= 1
        else:
            j -= 1
    return missing
