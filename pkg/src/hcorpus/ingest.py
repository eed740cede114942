"""Source book loading and corpus manifests.

Book files are UTF-8 text with one dedicated marker line per page::

    #PAGE 1
    ...page text...
    #PAGE 2
    ...

Pages may appear in any order on disk; the loaded book is always ordered
by page number. A file without any marker is treated as a single page 1.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import Category, SourceBook, SourcePage
from .normalize import NormalizationProfile, normalize

logger = logging.getLogger(__name__)

PAGE_MARKER_RE = re.compile(r"^#PAGE\s+(\d+)\s*$", re.MULTILINE)


class IngestError(Exception):
    pass


def load_book(
    path: str | Path,
    book_id: str,
    declared_category: Category,
    profile: NormalizationProfile | None = None,
    title: str | None = None,
) -> SourceBook:
    """Load and normalize one source book file."""
    path = Path(path)
    raw_bytes = path.read_bytes()
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(
            "undecodable bytes in %s at byte offset %d: %s" % (path, exc.start, exc.reason)
        )

    chunks: list[tuple[int, str]] = []
    markers = list(PAGE_MARKER_RE.finditer(text))
    if not markers:
        if text.strip():
            chunks.append((1, text))
    else:
        preamble = text[: markers[0].start()]
        if preamble.strip():
            raise IngestError("%s: content before the first #PAGE marker" % path)
        for i, m in enumerate(markers):
            end = markers[i + 1].start() if i + 1 < len(markers) else len(text)
            chunks.append((int(m.group(1)), text[m.end():end]))

    if not chunks:
        raise IngestError("%s: no pages found" % path)
    seen = set()
    for page_no, _ in chunks:
        if page_no in seen:
            raise IngestError("%s: duplicate page number %d" % (path, page_no))
        seen.add(page_no)

    pages = [
        SourcePage(page_no=no, raw_text=raw, normalized_text=normalize(raw, profile))
        for no, raw in sorted(chunks)
    ]
    book = SourceBook(
        book_id=book_id,
        title=title if title is not None else path.stem,
        category=declared_category,
        pages=pages,
    )
    book.validate()
    return book


def load_reclassification_table(path: str | Path) -> dict[str, Category]:
    """Two-column delimited file: book_id, category. Comma or tab delimited."""
    path = Path(path)
    table: dict[str, Category] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        delimiter = "\t" if "\t" in sample else ","
        for row_no, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise IngestError("%s row %d: expected two columns" % (path, row_no))
            book_id, category = row[0].strip(), row[1].strip()
            if row_no == 1 and book_id.lower() == "book_id":
                continue
            try:
                table[book_id] = Category(category)
            except ValueError:
                raise IngestError(
                    "%s row %d: unknown category %r (expected one of %s)"
                    % (path, row_no, category, sorted(c.value for c in Category))
                )
    return table


def apply_reclassification(book: SourceBook, table: dict[str, Category]) -> SourceBook:
    """Override a book's declared category from the reclassification table."""
    new_category = table.get(book.book_id)
    if new_category is not None and new_category != book.category:
        logger.info(
            "reclassifying %s: %s -> %s", book.book_id, book.category.value, new_category.value
        )
        book.category = new_category
        book.reclassified = True
    return book


@dataclass
class SourceEntry:
    path: str
    book_id: str
    category: Category


def load_source_manifest(path: str | Path) -> list[SourceEntry]:
    """CSV listing the books to ingest: path, book_id, category."""
    path = Path(path)
    entries = []
    with path.open(encoding="utf-8", newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row_no == 1 and row[0].strip().lower() == "path":
                continue
            if len(row) < 3:
                raise IngestError("%s row %d: expected path,book_id,category" % (path, row_no))
            try:
                category = Category(row[2].strip())
            except ValueError:
                raise IngestError("%s row %d: unknown category %r" % (path, row_no, row[2].strip()))
            entry_path = Path(row[0].strip())
            if not entry_path.is_absolute():
                entry_path = path.parent / entry_path
            entries.append(SourceEntry(str(entry_path), row[1].strip(), category))
    return entries


@dataclass
class CorpusManifest:
    """Corpus-level configuration checked into the corpus root."""

    name: str
    source_description: str = ""
    languages: list[str] = field(default_factory=list)
    tag_vocabulary: list[str] = field(default_factory=list)
    pipeline: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.name:
            raise IngestError("manifest name must be non-empty")
        if len(set(self.languages)) != len(self.languages):
            raise IngestError("manifest languages must not repeat")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source_description": self.source_description,
            "languages": list(self.languages),
            "tag_vocabulary": list(self.tag_vocabulary),
            "pipeline": self.pipeline,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusManifest":
        known = {"name", "source_description", "languages", "tag_vocabulary", "pipeline"}
        unknown = set(d) - known
        if unknown:
            raise IngestError("unknown manifest keys: %s" % sorted(unknown))
        return cls(
            name=d.get("name", ""),
            source_description=d.get("source_description", ""),
            languages=list(d.get("languages", [])),
            tag_vocabulary=list(d.get("tag_vocabulary", [])),
            pipeline=dict(d.get("pipeline", {})),
        )

    def save(self, path: str | Path) -> None:
        self.validate()
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "CorpusManifest":
        manifest = cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        manifest.validate()
        return manifest
