#!/usr/bin/env python3
"""Write a synthetic demo corpus to disk, ready for `hcorpus run`.

Produces page-marked source files, the sources CSV that points at them,
and a config whose work directory sits next to the sources.  The corpus
is deterministic for a given seed, so two invocations with the same
arguments produce identical trees.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hcorpus.config import PipelineConfig, save_config
from hcorpus.synth import GoldCorpus, make_gold_corpus

log = logging.getLogger("make_demo_corpus")


def write_sources(gold: GoldCorpus, root: Path) -> Path:
    """Write each book as a page-marked text file plus a sources CSV;
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


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make_demo_corpus",
        description="generate a deterministic synthetic corpus for the demo pipeline",
    )
    parser.add_argument("--out", required=True, help="directory to create the corpus in")
    parser.add_argument("--seed", type=int, default=7, help="corpus RNG seed (default 7)")
    parser.add_argument("--books", type=int, default=3, help="number of books (default 3)")
    parser.add_argument(
        "--narrations-per-book", type=int, default=40,
        help="planted narrations per book (default 40)",
    )
    parser.add_argument(
        "--languages", default="en",
        help="comma-separated translation languages for the enrich stage (default en)",
    )
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    gold = make_gold_corpus(
        seed=args.seed, n_books=args.books, narrations_per_book=args.narrations_per_book
    )
    sources_path = write_sources(gold, root)

    config = PipelineConfig(
        work_dir=str(root / "work"),
        sources_path=str(sources_path),
        seed=args.seed,
    )
    config.enrich.languages = [
        lang.strip() for lang in args.languages.split(",") if lang.strip()
    ]
    config.validate()
    config_path = root / "config.json"
    save_config(config, config_path)

    log.info("wrote %d books (%d narrations) under %s", len(gold.books),
             len(gold.narrations), root / "sources")
    log.info("sources table: %s", sources_path)
    log.info("config: %s", config_path)
    log.info("next: python3 scripts/run_demo.py --config %s", config_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
