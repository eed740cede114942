"""Expert-evaluation statistics: sampling, error rates, and reports.

Naming note (important): in this codebase the *micro* error rate is the
mean of per-record rates (every narration weighted equally) and the
*macro* error rate pools units across records (longer narrations weigh
more). This follows the corpus-evaluation convention used throughout the
project's reports; readers coming from mainstream ML literature should
note it is the reverse of the usual micro/macro naming there.

Report conventions (documented artifact choices):
  * A narration is non-hadith if any evaluator flagged it; non-hadith
    narrations are excluded from score means and error aggregation.
  * Critical failures (any core dimension above the threshold) are
    excluded from score means and from the headline error rates, but are
    reported separately with their own pooled rates; their rate is
    computed over all evaluated narrations.
  * Scores from multiple evaluators of one narration are averaged per
    aspect before aspect means are taken; error units are summed.
  * A record's overall score is the mean of the aspects it carries;
    aspects nobody scored render as absent.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .model import (
    CORE_DIMENSIONS,
    ErrorDimension,
    EvaluationAspect,
    EvaluationRecord,
)

logger = logging.getLogger(__name__)

DEFAULT_CRITICAL_THRESHOLD = 60.0  # percent


class EvaluateError(ValueError):
    pass


def draw_sample(ids, n: int, seed: int) -> list[str]:
    """Uniform sample without replacement, reproducible from the seed."""
    pool = sorted(ids)
    if n > len(pool):
        raise EvaluateError("sample size %d exceeds corpus size %d" % (n, len(pool)))
    return random.Random(seed).sample(pool, n)


def suppress_cascades(record: EvaluationRecord) -> dict[ErrorDimension, tuple[int, int]]:
    """Error counts with cascade-linked dimensions zeroed.

    A dimension whose errors were annotated as caused by an upstream
    dimension contributes no error units of its own; the upstream
    dimension keeps its full count, so each mistake is penalized once.
    """
    adjusted = {}
    for dim, (errors, total) in record.error_counts.items():
        if dim in record.root_cause_links and record.root_cause_links[dim] is not None:
            adjusted[dim] = (0, total)
        else:
            adjusted[dim] = (errors, total)
    return adjusted


def micro_error_rate(records, dimension: ErrorDimension) -> float | None:
    """Mean of per-record error rates, as a percentage. None when no
    record carries the dimension."""
    rates = [
        errors / total * 100.0
        for record in records
        for errors, total in [record.error_counts.get(dimension, (0, 0))]
        if total > 0
    ]
    if not rates:
        return None
    return sum(rates) / len(rates)


def macro_error_rate(records, dimension: ErrorDimension) -> float | None:
    """Pooled error rate (unit-weighted), as a percentage. None when no
    record carries the dimension."""
    total_errors = 0
    total_units = 0
    for record in records:
        errors, total = record.error_counts.get(dimension, (0, 0))
        total_errors += errors
        total_units += total
    if total_units == 0:
        return None
    return total_errors / total_units * 100.0


@dataclass
class NarrationView:
    """One narration's evaluations folded together across evaluators."""

    narration_id: str
    aspect_scores: dict[EvaluationAspect, float] = field(default_factory=dict)
    error_counts: dict[ErrorDimension, tuple[int, int]] = field(default_factory=dict)
    is_non_hadith: bool = False

    def overall(self) -> float | None:
        if not self.aspect_scores:
            return None
        return sum(self.aspect_scores.values()) / len(self.aspect_scores)

    def error_rate(self, dimension: ErrorDimension) -> float | None:
        errors, total = self.error_counts.get(dimension, (0, 0))
        if total == 0:
            return None
        return errors / total * 100.0


def pool_by_narration(records) -> list[NarrationView]:
    """Fold records into per-narration views: cascade suppression per
    record, then scores averaged and error units summed across
    evaluators; the non-hadith flag is an any-evaluator OR."""
    by_narration: dict[str, list[EvaluationRecord]] = {}
    for record in records:
        record.validate()
        by_narration.setdefault(record.narration_id, []).append(record)
    views = []
    for narration_id in sorted(by_narration):
        group = by_narration[narration_id]
        view = NarrationView(narration_id=narration_id)
        score_lists: dict[EvaluationAspect, list[float]] = {}
        for record in group:
            for aspect, score in record.aspect_scores.items():
                score_lists.setdefault(aspect, []).append(score)
            for dim, (errors, total) in suppress_cascades(record).items():
                prev_e, prev_t = view.error_counts.get(dim, (0, 0))
                view.error_counts[dim] = (prev_e + errors, prev_t + total)
            view.is_non_hadith = view.is_non_hadith or record.is_non_hadith
        view.aspect_scores = {a: sum(v) / len(v) for a, v in score_lists.items()}
        views.append(view)
    return views


def split_views(views, critical_threshold: float = DEFAULT_CRITICAL_THRESHOLD):
    """Partition narration views into (kept, critical, non_hadith).

    Non-hadith narrations are set aside first; of the rest, any narration
    whose error rate in a core dimension exceeds the threshold is a
    critical failure.
    """
    kept, critical, non_hadith = [], [], []
    for view in views:
        if view.is_non_hadith:
            non_hadith.append(view)
            continue
        rates = [view.error_rate(dim) for dim in CORE_DIMENSIONS]
        if any(rate is not None and rate > critical_threshold for rate in rates):
            critical.append(view)
        else:
            kept.append(view)
    return kept, critical, non_hadith


def _view_micro(views, dimension) -> float | None:
    rates = [v.error_rate(dimension) for v in views]
    rates = [r for r in rates if r is not None]
    return sum(rates) / len(rates) if rates else None


def _view_macro(views, dimension) -> float | None:
    errors = sum(v.error_counts.get(dimension, (0, 0))[0] for v in views)
    units = sum(v.error_counts.get(dimension, (0, 0))[1] for v in views)
    return errors / units * 100.0 if units else None


@dataclass
class AggregateReport:
    sample_size: int
    n_narrations: int
    non_hadith_count: int
    critical_count: int
    overall_mean: float | None
    aspect_means: dict[EvaluationAspect, float | None]
    micro_rates: dict[ErrorDimension, float | None]
    macro_rates: dict[ErrorDimension, float | None]
    critical_macro_rates: dict[ErrorDimension, float | None]
    critical_threshold: float = DEFAULT_CRITICAL_THRESHOLD

    @property
    def non_hadith_rate(self) -> float:
        return self.non_hadith_count / self.n_narrations * 100.0 if self.n_narrations else 0.0

    @property
    def critical_rate(self) -> float:
        return self.critical_count / self.n_narrations * 100.0 if self.n_narrations else 0.0


def build_report(records, critical_threshold: float = DEFAULT_CRITICAL_THRESHOLD) -> AggregateReport:
    records = list(records)
    views = pool_by_narration(records)
    kept, critical, non_hadith = split_views(views, critical_threshold)

    aspect_means: dict[EvaluationAspect, float | None] = {}
    for aspect in EvaluationAspect:
        scores = [v.aspect_scores[aspect] for v in kept if aspect in v.aspect_scores]
        aspect_means[aspect] = sum(scores) / len(scores) if scores else None

    overalls = [v.overall() for v in kept]
    overalls = [o for o in overalls if o is not None]
    overall_mean = sum(overalls) / len(overalls) if overalls else None

    return AggregateReport(
        sample_size=len(records),
        n_narrations=len(views),
        non_hadith_count=len(non_hadith),
        critical_count=len(critical),
        overall_mean=overall_mean,
        aspect_means=aspect_means,
        micro_rates={d: _view_micro(kept, d) for d in ErrorDimension},
        macro_rates={d: _view_macro(kept, d) for d in ErrorDimension},
        critical_macro_rates={d: _view_macro(critical, d) for d in ErrorDimension},
        critical_threshold=critical_threshold,
    )


ASPECT_LABELS = {
    EvaluationAspect.CHAIN_TEXT_SEPARATION: "Chain-text separation",
    EvaluationAspect.SUMMARIZATION: "Summarization",
    EvaluationAspect.GROUPING: "Grouping of identical narrations",
    EvaluationAspect.ANALYTICAL_COMMENTARY: "Analytical commentary",
    EvaluationAspect.THEMATIC_TAGGING: "Thematic tagging",
    EvaluationAspect.KEY_POINTS: "Extraction of key points",
    EvaluationAspect.THEMATIC_SIMILARITY: "Thematic similarity",
    EvaluationAspect.LEXICAL_SIMILARITY: "Lexical similarity",
    EvaluationAspect.SEMANTIC_SIMILARITY: "Semantic similarity",
}

DIMENSION_LABELS = {
    ErrorDimension.TYPOS: "Typographical errors",
    ErrorDimension.TRANSLATION: "Translation errors",
    ErrorDimension.MISSING_WORDS: "Missing source words",
    ErrorDimension.TAGGING: "Tagging errors",
    ErrorDimension.KEY_PHRASES: "Key-phrase errors",
    ErrorDimension.DIACRITIZATION_CHAR: "Diacritization (char)",
}


def _fmt_score(value: float | None) -> str:
    return "-" if value is None else "%.2f" % value


def _fmt_rate(value: float | None) -> str:
    return "-" if value is None else "%.2f%%" % value


def format_report(report: AggregateReport) -> str:
    lines = []
    lines.append("evaluated narrations: %d (records: %d)" % (report.n_narrations, report.sample_size))
    lines.append("overall mean score: %s / 10" % _fmt_score(report.overall_mean))
    lines.append("non-hadith: %d (%.2f%%)" % (report.non_hadith_count, report.non_hadith_rate))
    lines.append(
        "critical failures (>%.0f%% core error): %d (%.2f%%)"
        % (report.critical_threshold, report.critical_count, report.critical_rate)
    )
    lines.append("")
    lines.append("%-34s %10s" % ("aspect", "mean"))
    for aspect in EvaluationAspect:
        lines.append("%-34s %10s" % (ASPECT_LABELS[aspect], _fmt_score(report.aspect_means[aspect])))
    lines.append("")
    lines.append("%-34s %10s %10s" % ("error dimension", "micro", "macro"))
    for dim in ErrorDimension:
        lines.append(
            "%-34s %10s %10s"
            % (DIMENSION_LABELS[dim], _fmt_rate(report.micro_rates[dim]), _fmt_rate(report.macro_rates[dim]))
        )
    if report.critical_count:
        lines.append("")
        lines.append("%-34s %10s" % ("critical subset (pooled)", "macro"))
        for dim in ErrorDimension:
            rate = report.critical_macro_rates[dim]
            if rate is not None:
                lines.append("%-34s %10s" % (DIMENSION_LABELS[dim], _fmt_rate(rate)))
    return "\n".join(lines)


@dataclass
class ComparativeReport:
    primary: AggregateReport
    comparison: AggregateReport


def build_comparative_report(primary_records, comparison_records,
                             critical_threshold: float = DEFAULT_CRITICAL_THRESHOLD) -> ComparativeReport:
    return ComparativeReport(
        primary=build_report(primary_records, critical_threshold),
        comparison=build_report(comparison_records, critical_threshold),
    )


def format_comparative_report(report: ComparativeReport) -> str:
    lines = []
    lines.append("%-34s %10s %12s" % ("aspect", "primary", "comparison"))
    lines.append(
        "%-34s %10s %12s"
        % (
            "Overall mean score",
            _fmt_score(report.primary.overall_mean),
            _fmt_score(report.comparison.overall_mean),
        )
    )
    for aspect in EvaluationAspect:
        lines.append(
            "%-34s %10s %12s"
            % (
                ASPECT_LABELS[aspect],
                _fmt_score(report.primary.aspect_means[aspect]),
                _fmt_score(report.comparison.aspect_means[aspect]),
            )
        )
    lines.append("")
    lines.append("%-34s %10s %12s" % ("error dimension (macro)", "primary", "comparison"))
    for dim in ErrorDimension:
        lines.append(
            "%-34s %10s %12s"
            % (
                DIMENSION_LABELS[dim],
                _fmt_rate(report.primary.macro_rates[dim]),
                _fmt_rate(report.comparison.macro_rates[dim]),
            )
        )
    return "\n".join(lines)


def report_to_csv(report: AggregateReport, comparison: AggregateReport | None = None) -> str:
    """Flat CSV rendering: section,key,primary[,comparison]."""
    cols = 4 if comparison is not None else 3
    rows = [["section", "key", "primary", "comparison"][:cols]]

    def add(section, key, a, b=None):
        row = [section, key, a if a is not None else ""]
        if comparison is not None:
            row.append(b if b is not None else "")
        rows.append([str(x) for x in row])

    add("headline", "narrations", report.n_narrations,
        comparison.n_narrations if comparison else None)
    add("headline", "overall_mean", _none_fmt(report.overall_mean),
        _none_fmt(comparison.overall_mean) if comparison else None)
    add("headline", "non_hadith_rate", "%.2f" % report.non_hadith_rate,
        "%.2f" % comparison.non_hadith_rate if comparison else None)
    add("headline", "critical_rate", "%.2f" % report.critical_rate,
        "%.2f" % comparison.critical_rate if comparison else None)
    for aspect in EvaluationAspect:
        add("aspect", aspect.value, _none_fmt(report.aspect_means[aspect]),
            _none_fmt(comparison.aspect_means[aspect]) if comparison else None)
    for dim in ErrorDimension:
        add("macro_error", dim.value, _none_fmt(report.macro_rates[dim]),
            _none_fmt(comparison.macro_rates[dim]) if comparison else None)
        add("micro_error", dim.value, _none_fmt(report.micro_rates[dim]),
            _none_fmt(comparison.micro_rates[dim]) if comparison else None)
    return "\n".join(",".join(row) for row in rows) + "\n"


def _none_fmt(value: float | None) -> str:
    return "" if value is None else "%.2f" % value
