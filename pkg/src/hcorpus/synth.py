"""Synthetic gold corpus for pipeline validation.

Generates classical-styled source books with exactly known narration
boundaries: every narration is written as transmission-formula chain +
separator + body, sections are introduced by headings, and running
commentary appears only between a heading and the section's first
narration. All emitted text is already in normalized orthography (no
combining marks, unified alef forms, single spaces), so normalization is
the identity on it and the recorded gold offsets are exact coordinates in
the ingested page stream.

Layout gaps are uniformly one character wide (a space between items, the
page seam between pages), which keeps gold offsets straightforward to
compute while exercising page-boundary bookkeeping.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .model import Category, SourceBook, SourcePage
from .normalize import normalize

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20260817

_OPENERS = ("حدثنا", "اخبرنا", "حدثني", "اخبرني", "سمعت")

_NAMES = (
    "محمد بن اسماعيل",
    "احمد بن حنبل",
    "علي بن المديني",
    "يحيي بن معين",
    "سفيان بن عيينة",
    "مالك بن انس",
    "وكيع بن الجراح",
    "هشام بن عروة",
    "يونس بن عبيد",
    "شعبة بن الحجاج",
    "عبد الله بن المبارك",
    "اسحاق بن راهويه",
)

_MATN_WORDS = (
    "الصدق", "الامانة", "خير", "الناس", "انفعهم", "العمل", "النية",
    "الصلاة", "نور", "الزكاة", "طهرة", "العلم", "طلب", "فريضة",
    "الكلمة", "الطيبة", "صدقة", "الرحمة", "تنزل", "عند", "ذكر",
    "الصالحين", "المؤمن", "مراة", "اخيه", "التقوي", "ههنا", "البر",
    "حسن", "الخلق", "اليد", "العليا", "من", "في", "علي", "لكل",
    "امرئ", "ما", "نوي", "جار", "وصية", "حق", "الطريق", "غض",
    "البصر", "ورد", "السلام", "اصلاح", "ذات", "البين", "افضل",
)

_TOPICS = (
    "النية والاخلاص",
    "فضل العلم",
    "حسن الخلق",
    "الصدق والامانة",
    "حق الجار",
    "اداب الطريق",
    "فضل الصدقة",
    "صلة الارحام",
    "ذكر الرحمة",
    "التيسير ورفع الحرج",
)

_SEPARATOR = ": "


@dataclass(frozen=True)
class GoldNarration:
    """One planted narration with exact stream coordinates."""

    book_id: str
    chain: str
    text: str
    char_start: int
    char_end: int
    chain_span: tuple[int, int]
    body_span: tuple[int, int]
    page_start: int
    page_end: int


@dataclass
class GoldCorpus:
    books: list[SourceBook] = field(default_factory=list)
    narrations: list[GoldNarration] = field(default_factory=list)
    fillers: list[tuple[str, int, int]] = field(default_factory=list)  # (book_id, start, end)

    def book(self, book_id: str) -> SourceBook:
        for b in self.books:
            if b.book_id == book_id:
                return b
        raise KeyError(book_id)


def _sentence(rng: random.Random) -> str:
    n = rng.randint(4, 9)
    return " ".join(rng.choice(_MATN_WORDS) for _ in range(n)) + "."


def _chain(rng: random.Random) -> str:
    opener = rng.choice(_OPENERS)
    names = rng.sample(_NAMES, rng.randint(1, 3))
    return opener + " " + " عن ".join(names) + " قال"


def _narration_item(rng: random.Random) -> tuple[str, str, str]:
    """Returns (full item text, chain, body)."""
    chain = _chain(rng)
    body = " ".join(_sentence(rng) for _ in range(rng.randint(1, 3)))
    return chain + _SEPARATOR + body, chain, body


def _heading_item(rng: random.Random) -> str:
    kind = rng.choice(("باب", "كتاب", "فصل"))
    return "%s %s." % (kind, rng.choice(_TOPICS))


def _commentary_item(rng: random.Random) -> str:
    return "وهذا %s يجمع ما ورد في %s." % (
        rng.choice(("الباب", "الفصل")),
        rng.choice(_TOPICS),
    )


def make_gold_corpus(
    seed: int = DEFAULT_SEED,
    n_books: int = 3,
    narrations_per_book: int = 40,
    items_per_page: int = 6,
) -> GoldCorpus:
    """Build a deterministic corpus with exact gold narration spans."""
    rng = random.Random(seed)
    corpus = GoldCorpus()
    for b in range(n_books):
        book_id = "gold-%02d" % (b + 1)
        # items: (kind, text, chain, body); kind in {"n", "f"}
        items: list[tuple[str, str, str, str]] = []
        n_narrations = 0
        while n_narrations < narrations_per_book:
            items.append(("f", _heading_item(rng), "", ""))
            for _ in range(rng.randint(0, 2)):
                items.append(("f", _commentary_item(rng), "", ""))
            for _ in range(rng.randint(1, 5)):
                text, chain, body = _narration_item(rng)
                items.append(("n", text, chain, body))
                n_narrations += 1

        # Pack items into pages; gaps are one char everywhere (space
        # inside a page, seam between pages).
        page_lists: list[list[tuple[str, str, str, str]]] = [[]]
        for item in items:
            if len(page_lists[-1]) >= items_per_page + rng.randint(-2, 2):
                page_lists.append([])
            page_lists[-1].append(item)
        page_lists = [p for p in page_lists if p]

        cursor = 0
        pages = []
        for page_index, page_items in enumerate(page_lists):
            page_no = page_index + 1
            for j, (kind, text, chain, body) in enumerate(page_items):
                if j > 0:
                    cursor += 1  # joining space
                start, end = cursor, cursor + len(text)
                if kind == "n":
                    corpus.narrations.append(
                        GoldNarration(
                            book_id=book_id,
                            chain=chain,
                            text=body,
                            char_start=start,
                            char_end=end,
                            chain_span=(start, start + len(chain)),
                            body_span=(start + len(chain) + len(_SEPARATOR), end),
                            page_start=page_no,
                            page_end=page_no,
                        )
                    )
                else:
                    corpus.fillers.append((book_id, start, end))
                cursor = end
            cursor += 1  # page seam
            page_text = " ".join(t for _, t, _, _ in page_items)
            pages.append(
                SourcePage(page_no=page_no, raw_text=page_text, normalized_text=page_text)
            )
        book = SourceBook(
            book_id=book_id,
            title="synthetic collection %d" % (b + 1),
            category=Category.HADITH,
            pages=pages,
        )
        for page in book.pages:
            if normalize(page.normalized_text) != page.normalized_text:
                raise AssertionError("generator must emit normalized text")
        corpus.books.append(book)
    logger.info(
        "gold corpus: %d books, %d narrations", len(corpus.books), len(corpus.narrations)
    )
    return corpus


_SUBSTITUTES = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي"


def perturb(text: str, rate: float, rng: random.Random) -> str:
    """Randomly substitute up to ``rate`` of the non-space characters.

    Substitution-only noise (no insertions or deletions), mirroring
    OCR-style letter confusions; the perturbed text keeps its length.
    """
    chars = list(text)
    positions = [i for i, ch in enumerate(chars) if not ch.isspace()]
    k = int(len(positions) * rate)
    for i in rng.sample(positions, k):
        old = chars[i]
        new = rng.choice(_SUBSTITUTES)
        while new == old:
            new = rng.choice(_SUBSTITUTES)
        chars[i] = new
    return "".join(chars)
