"""The normalized page stream of a book.

Pages are concatenated in page order with a single ``\\n`` seam between
consecutive non-empty pages, so narrations may span page boundaries while
every character keeps a well-defined home page. All narration offsets are
coordinates in this stream.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .model import SourceBook

SEAM = "\n"


@dataclass
class _PageSlice:
    page_no: int
    start: int
    end: int  # exclusive, not counting the seam


class PageStream:
    def __init__(self, book: SourceBook):
        self.book_id = book.book_id
        self.pages: list[_PageSlice] = []
        parts: list[str] = []
        cursor = 0
        for page in book.pages:
            text = page.normalized_text
            if not text:
                continue
            if parts:
                parts.append(SEAM)
                cursor += 1
            self.pages.append(_PageSlice(page.page_no, cursor, cursor + len(text)))
            parts.append(text)
            cursor += len(text)
        self.text = "".join(parts)
        self._starts = [p.start for p in self.pages]

    def page_at(self, offset: int) -> int:
        """Page number owning the character at ``offset``.

        Seam characters belong to the preceding page.
        """
        if not self.pages:
            raise ValueError("empty stream has no pages")
        offset = max(0, min(offset, len(self.text) - 1))
        i = bisect.bisect_right(self._starts, offset) - 1
        return self.pages[max(0, i)].page_no

    def span_pages(self, start: int, end: int) -> tuple[int, int]:
        """(page_start, page_end) for the span [start, end)."""
        if end <= start:
            raise ValueError("span must be non-empty")
        return self.page_at(start), self.page_at(end - 1)

    def page_bounds(self, page_no: int) -> tuple[int, int]:
        for p in self.pages:
            if p.page_no == page_no:
                return p.start, p.end
        raise KeyError("page %d not in stream" % page_no)
