"""Shared fixtures: a synthetic gold corpus and a ready-to-run work area."""

from __future__ import annotations

from pathlib import Path

import pytest

from hcorpus.config import PipelineConfig, save_config
from hcorpus.synth import GoldCorpus, make_gold_corpus


@pytest.fixture(scope="session")
def gold_corpus() -> GoldCorpus:
    return make_gold_corpus()


def write_sources(gold: GoldCorpus, root: Path) -> Path:
    """Write the gold corpus as page-marked source files plus a sources CSV;
    return the CSV path."""
    src_dir = root / "sources"
    src_dir.mkdir(parents=True, exist_ok=True)
    rows = ["path,book_id,category"]
    for book in gold.books:
        parts = []
        for page in book.pages:
            parts.append("#PAGE %d\n" % page.page_no)
            parts.append(page.raw_text)
            parts.append("\n")
        path = src_dir / ("%s.txt" % book.book_id)
        path.write_text("".join(parts), encoding="utf-8")
        rows.append("%s,%s,%s" % (path, book.book_id, book.category.value))
    sources_path = root / "sources.csv"
    sources_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return sources_path


@pytest.fixture()
def work_area(tmp_path: Path, gold_corpus: GoldCorpus):
    """A config (and its JSON file) pointing at the gold corpus on disk."""
    sources_path = write_sources(gold_corpus, tmp_path)
    config = PipelineConfig(
        work_dir=str(tmp_path / "work"),
        sources_path=str(sources_path),
        seed=7,
    )
    config_path = tmp_path / "config.json"
    save_config(config, config_path)
    return config_path, config
