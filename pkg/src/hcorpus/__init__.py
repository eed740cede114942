"""Corpus construction pipeline for classical hadith collections.

The package turns page-oriented Arabic source books into a store of
individually addressable narrations, each carrying its transmission chain,
main text, source coordinates, enrichment layers (translations,
diacritization, summaries, key points, tags), grouping information, and
human evaluation records.
"""

__version__ = "0.1.0"
