#!/usr/bin/env python3
"""Run the full pipeline on a demo corpus and tour the results.

Drives the same command-line entry points a user would call by hand:
`run` for the five pipeline stages, `similar` for a nearest-neighbour
lookup on the first narration, and `value` for the bundled effort
valuation table.  Expects a config produced by make_demo_corpus.py.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hcorpus.cli import main as hcorpus_main
from hcorpus.config import load_config


def _banner(title: str) -> None:
    print()
    print("== %s ==" % title)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="run_demo",
        description="run the pipeline end to end on a generated demo corpus",
    )
    parser.add_argument("--config", required=True, help="config JSON from make_demo_corpus.py")
    parser.add_argument("--top", type=int, default=3, help="neighbours to list (default 3)")
    args = parser.parse_args(argv)

    config = load_config(args.config)

    _banner("pipeline")
    code = hcorpus_main(["run", "--config", args.config])
    if code != 0:
        return code

    store_path = Path(config.narrations_store)
    first_id = None
    with open(store_path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            body = json.loads(line)["body"]
            if "non_hadith_suspect" not in body.get("qc_flags", []):
                first_id = body["narration_id"]
                break
    if first_id is None:
        print("no narrations were extracted", file=sys.stderr)
        return 1

    _banner("nearest neighbours of %s" % first_id)
    code = hcorpus_main(
        ["similar", "--config", args.config, "--id", first_id, "--top", str(args.top)]
    )
    if code != 0:
        return code

    _banner("effort valuation (bundled reference tasks)")
    return hcorpus_main(["value"])


if __name__ == "__main__":
    raise SystemExit(main())
