"""Narration similarity measures and identical-narration grouping.

Three views of similarity: lexical (Jaccard over word bigrams), semantic
(cosine of embedding vectors, clamped to [0, 1]), and thematic (Jaccard
over tag sets). Grouping builds single-link connected components over
pairs whose lexical similarity clears the threshold; candidate pairs come
from an inverted n-gram index so the all-pairs cost is avoided without
ever changing the resulting partition (any pair with nonzero lexical
similarity shares at least one indexed n-gram).
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_GROUP_THRESHOLD = 0.90


def word_ngrams(text: str, n: int) -> set[tuple[str, ...]]:
    words = text.split()
    if len(words) < n:
        return {(w,) for w in words} if n > 1 else set()
    return {tuple(words[i:i + n]) for i in range(len(words) - n + 1)}


def _jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def lexical_similarity(a: str, b: str) -> float:
    """Jaccard over word bigrams; unigram fallback when either text has
    fewer than two words. Two empty texts are identical (1.0)."""
    wa, wb = a.split(), b.split()
    if not wa and not wb:
        return 1.0
    n = 2 if len(wa) >= 2 and len(wb) >= 2 else 1
    ga = {tuple(wa[i:i + n]) for i in range(len(wa) - n + 1)}
    gb = {tuple(wb[i:i + n]) for i in range(len(wb) - n + 1)}
    return _jaccard(ga, gb)


def semantic_similarity(va, vb) -> float:
    """Cosine similarity clamped to [0, 1]; vectors must share a dimension."""
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    if va.shape != vb.shape:
        raise ValueError("embedding dimension mismatch: %s vs %s" % (va.shape, vb.shape))
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, float(va @ vb) / (na * nb))))


def thematic_similarity(tags_a, tags_b) -> float:
    """Jaccard over tag sets; two empty tag sets share nothing (0.0)."""
    sa, sb = set(tags_a), set(tags_b)
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


class HashingEmbedder:
    """Deterministic local embedder: signed hashed bag of words, L2-normalized.

    Stable across runs and platforms (hashes via sha1, not the salted
    builtin). Empty text maps to a fixed unit vector so norms are never
    zero.
    """

    def __init__(self, dim: int = 64):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for word in text.split():
            digest = hashlib.sha1(word.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[idx] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


def candidate_pairs(texts: dict[str, str]) -> set[tuple[str, str]]:
    """Pairs sharing at least one word unigram or bigram.

    Indexing both n-gram orders keeps the blocking lossless for the mixed
    bigram/unigram comparison lexical_similarity performs. Tokenless texts
    (empty or whitespace-only) are mutually identical under that metric,
    so they share a dedicated block rather than vanishing from the index.
    """
    index: dict[tuple[str, ...], list[str]] = {}
    for key in sorted(texts):
        grams = set()
        words = texts[key].split()
        grams.update((w,) for w in words)
        grams.update(tuple(words[i:i + 2]) for i in range(len(words) - 1))
        if not words:
            grams.add(())
        for gram in grams:
            index.setdefault(gram, []).append(key)
    pairs: set[tuple[str, str]] = set()
    for keys in index.values():
        if len(keys) < 2:
            continue
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                pairs.add((a, b) if a < b else (b, a))
    return pairs


class _DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def group_identical(texts: dict[str, str], threshold: float = DEFAULT_GROUP_THRESHOLD) -> dict[str, str]:
    """Map narration id -> group id (minimum id in its component).

    Single-link: components of the graph whose edges are pairs with
    lexical similarity >= threshold.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError("threshold must lie in (0, 1]")
    dsu = _DisjointSet(texts.keys())
    for a, b in sorted(candidate_pairs(texts)):
        if lexical_similarity(texts[a], texts[b]) >= threshold:
            dsu.union(a, b)
    groups: dict[str, str] = {}
    roots: dict[str, str] = {}
    for key in sorted(texts):
        root = dsu.find(key)
        if root not in roots:
            roots[root] = key  # minimum id: keys visited in sorted order
        groups[key] = roots[root]
    return groups


def rank_neighbors(
    target_id: str,
    texts: dict[str, str],
    tags: dict[str, list[str]] | None = None,
    embedder: HashingEmbedder | None = None,
    top: int = 10,
) -> list[dict]:
    """Nearest neighbors of one narration under all three measures,
    ranked by semantic similarity (lexical breaks ties)."""
    if target_id not in texts:
        raise KeyError("unknown narration id: %s" % target_id)
    embedder = embedder or HashingEmbedder()
    tags = tags or {}
    target_vec = embedder.embed(texts[target_id])
    target_tags = tags.get(target_id, [])
    rows = []
    for other, text in texts.items():
        if other == target_id:
            continue
        rows.append(
            {
                "narration_id": other,
                "lexical": lexical_similarity(texts[target_id], text),
                "semantic": semantic_similarity(target_vec, embedder.embed(text)),
                "thematic": thematic_similarity(target_tags, tags.get(other, [])),
            }
        )
    rows.sort(key=lambda r: (-r["semantic"], -r["lexical"], r["narration_id"]))
    return rows[:top]
