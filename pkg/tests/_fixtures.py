"""Calibrated evaluation-record fixtures.

The headline corpus is engineered so the aggregate report prints exact
target figures: 2000 narration records of which 305 are non-hadith
(15.25%) and 117 are critical failures (5.85%), with the kept remainder
averaging an overall score of 8.46 and hitting every per-aspect mean and
pooled error rate on the digit. The arithmetic behind the composition:

  * 1404 records carry all nine aspects at the target means
    (per-record overall 77.25 / 9),
  * 148 records carry {lexical 7.30, semantic 7.28} (overall 7.29),
  * 26 records carry {semantic 7.28, commentary 8.77, summarization 9.33}
    (overall exactly 8.46, the corpus target, so they shift nothing),

giving (1404 * 77.25/9 + 148 * 7.29 + 26 * 8.46) / 1578 = 8.46 exactly.
Every carried score equals its aspect's target, so aspect means are
pinned regardless of the mix. Six designated kept records carry one
error dimension each, sized so the pooled rates land on the targets.
"""

from __future__ import annotations

from hcorpus.model import ErrorDimension, EvaluationAspect, EvaluationRecord

A = EvaluationAspect
D = ErrorDimension

TARGET_ASPECT_MEANS = {
    A.CHAIN_TEXT_SEPARATION: 9.30,
    A.SUMMARIZATION: 9.33,
    A.GROUPING: 9.19,
    A.ANALYTICAL_COMMENTARY: 8.77,
    A.THEMATIC_TAGGING: 8.84,
    A.KEY_POINTS: 8.47,
    A.THEMATIC_SIMILARITY: 8.77,
    A.LEXICAL_SIMILARITY: 7.30,
    A.SEMANTIC_SIMILARITY: 7.28,
}

TARGET_OVERALL = "8.46"
TARGET_NON_HADITH_RATE = "15.25"
TARGET_CRITICAL_RATE = "5.85"

# (error_units, total_units) per dimension, each on its own kept record.
TARGET_MACRO_COUNTS = {
    D.TYPOS: (43, 10000),
    D.TRANSLATION: (351, 10000),
    D.MISSING_WORDS: (139, 10000),
    D.TAGGING: (451, 10000),
    D.KEY_PHRASES: (100, 10000),
    D.DIACRITIZATION_CHAR: (249, 10000),
}
TARGET_MACRO_RATES = {
    D.TYPOS: "0.43",
    D.TRANSLATION: "3.51",
    D.MISSING_WORDS: "1.39",
    D.TAGGING: "4.51",
    D.KEY_PHRASES: "1.00",
    D.DIACRITIZATION_CHAR: "2.49",
}

N_FULL = 1404
N_PAIR = 148
N_TRIPLE = 26
N_CRITICAL = 117
N_NON_HADITH = 305
N_TOTAL = N_FULL + N_PAIR + N_TRIPLE + N_CRITICAL + N_NON_HADITH  # 2000


def _record(i: int, aspects, errors=None, non_hadith=False) -> EvaluationRecord:
    return EvaluationRecord(
        narration_id="n%04d" % i,
        evaluator_id="e1",
        aspect_scores=dict(aspects),
        error_counts=dict(errors or {}),
        is_non_hadith=non_hadith,
    )


def headline_records() -> list[EvaluationRecord]:
    """2000 single-evaluator records hitting every headline target."""
    records = []
    i = 0
    dims = list(TARGET_MACRO_COUNTS)
    for k in range(N_FULL):
        errors = {}
        if k < len(dims):
            dim = dims[k]
            errors = {dim: TARGET_MACRO_COUNTS[dim]}
        records.append(_record(i, TARGET_ASPECT_MEANS, errors))
        i += 1
    pair = {A.LEXICAL_SIMILARITY: 7.30, A.SEMANTIC_SIMILARITY: 7.28}
    for _ in range(N_PAIR):
        records.append(_record(i, pair))
        i += 1
    triple = {
        A.SEMANTIC_SIMILARITY: 7.28,
        A.ANALYTICAL_COMMENTARY: 8.77,
        A.SUMMARIZATION: 9.33,
    }
    for _ in range(N_TRIPLE):
        records.append(_record(i, triple))
        i += 1
    for _ in range(N_CRITICAL):
        records.append(
            _record(i, {a: 3.0 for a in A}, {D.TRANSLATION: (61, 100)})
        )
        i += 1
    for _ in range(N_NON_HADITH):
        records.append(_record(i, {}, non_hadith=True))
        i += 1
    assert len(records) == N_TOTAL
    return records


# Side-by-side error-rate targets for the comparative report fixture:
# {dimension: (primary (units, total), comparison (units, total))}.
COMPARATIVE_COUNTS = {
    D.TRANSLATION: ((480, 10000), (1043, 10000)),
    D.MISSING_WORDS: ((202, 10000), (16, 10000)),
    D.DIACRITIZATION_CHAR: ((248, 10000), (3, 10000)),
    D.TYPOS: ((85, 10000), (266, 10000)),
}
COMPARATIVE_RATES = {
    D.TRANSLATION: ("4.80", "10.43"),
    D.MISSING_WORDS: ("2.02", "0.16"),
    D.DIACRITIZATION_CHAR: ("2.48", "0.03"),
    D.TYPOS: ("0.85", "2.66"),
}

# The comparison resource scores only four aspects; the rest must render
# as absent in the side-by-side table.
COMPARISON_ASPECT_MEANS = {
    A.CHAIN_TEXT_SEPARATION: 9.63,
    A.GROUPING: 9.23,
    A.LEXICAL_SIMILARITY: 7.61,
    A.SEMANTIC_SIMILARITY: 6.71,
}


def comparative_records():
    """(primary, comparison) record sets for the side-by-side table."""
    primary = [_record(k, TARGET_ASPECT_MEANS) for k in range(8)]
    primary.append(
        _record(8, TARGET_ASPECT_MEANS, {d: p for d, (p, _) in COMPARATIVE_COUNTS.items()})
    )
    comparison = [_record(k, COMPARISON_ASPECT_MEANS) for k in range(8)]
    comparison.append(
        _record(8, COMPARISON_ASPECT_MEANS, {d: c for d, (_, c) in COMPARATIVE_COUNTS.items()})
    )
    return primary, comparison
