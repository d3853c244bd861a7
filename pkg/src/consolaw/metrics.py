"""Word-error metric, normalization-based correctness, and report rendering.

Texts are normalized before comparison: case-folded, accents folded to base
letters, every character that is not a letter, digit, or whitespace removed
(a documented superset of "accents, commas, and line breaks"), and whitespace
collapsed to single spaces. The word-error count and the correctness check
share this single text algebra.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
import unicodedata
from dataclasses import dataclass

from .model import ConsolidationRecord, InvariantViolation, _require


class EmptyList(ValueError):
    """Aggregate statistics require at least one value."""


class MissingGold(Exception):
    """Possible records without any gold text cannot be scored."""

    def __init__(self, ids: tuple[str, ...]):
        super().__init__(f"no gold text for records: {', '.join(ids)}")
        self.ids = ids


def normalize(text: str) -> str:
    """Fold case and accents, strip non-alphanumeric characters, collapse spaces.

    Idempotent: normalize(normalize(x)) == normalize(x).
    """
    decomposed = unicodedata.normalize("NFKD", text.casefold())
    # Combining accents are category Mn, punctuation P*, symbols S*: none are
    # letters, digits, or whitespace, so all are dropped here.
    kept = [ch for ch in decomposed if ch.isspace() or unicodedata.category(ch)[0] in ("L", "N")]
    return " ".join("".join(kept).split())


def is_correct(predicted: str, gold: str) -> bool:
    """Paper-style correctness: equality after normalization."""
    return normalize(predicted) == normalize(gold)


@dataclass(frozen=True)
class WordErrorReport:
    """Word-level edit counts between a prediction and the expected text."""

    additions: int
    deletions: int
    substitutions: int
    total: int
    pred_len_words: int
    gold_len_words: int

    def __post_init__(self) -> None:
        for name in ("additions", "deletions", "substitutions"):
            _require(getattr(self, name) >= 0, f"{name} must be non-negative")
        _require(
            self.total == self.additions + self.deletions + self.substitutions,
            "total must equal additions + deletions + substitutions",
        )
        _require(
            self.total <= self.pred_len_words + self.gold_len_words,
            "total cannot exceed the combined word counts",
        )


def word_error(predicted: str, gold: str) -> WordErrorReport:
    """Word-level Levenshtein counts over normalized, whitespace-tokenized texts.

    Additions are extra predicted words, deletions are gold words missing from
    the prediction. The breakdown comes from one minimal-cost alignment with a
    fixed backtrace preference (substitution, then deletion, then addition) so
    the split is deterministic.
    """
    pred = normalize(predicted).split()
    gold_words = normalize(gold).split()
    np_, ng = len(pred), len(gold_words)

    dist = [[0] * (ng + 1) for _ in range(np_ + 1)]
    for i in range(1, np_ + 1):
        dist[i][0] = i
    for j in range(1, ng + 1):
        dist[0][j] = j
    for i in range(1, np_ + 1):
        row = dist[i]
        prev = dist[i - 1]
        pw = pred[i - 1]
        for j in range(1, ng + 1):
            sub = prev[j - 1] + (pw != gold_words[j - 1])
            row[j] = min(sub, row[j - 1] + 1, prev[j] + 1)

    additions = deletions = substitutions = 0
    i, j = np_, ng
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (pred[i - 1] != gold_words[j - 1]):
            if pred[i - 1] != gold_words[j - 1]:
                substitutions += 1
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            deletions += 1
            j -= 1
        else:
            additions += 1
            i -= 1

    return WordErrorReport(
        additions=additions,
        deletions=deletions,
        substitutions=substitutions,
        total=additions + deletions + substitutions,
        pred_len_words=np_,
        gold_len_words=ng,
    )


@dataclass(frozen=True)
class AggregateStats:
    mean: float
    median: float
    ci95_halfwidth: float
    n: int

    def __post_init__(self) -> None:
        _require(self.n >= 1, "aggregate needs at least one sample")
        _require(self.ci95_halfwidth >= 0, "ci95_halfwidth must be non-negative")


def aggregate(errors: list[int]) -> AggregateStats:
    """Mean, median (midpoint for even n), and a normal-approximation 95% CI
    half-width (1.96 × sample stddev / sqrt(n); 0 for a single sample)."""
    if not errors:
        raise EmptyList("cannot aggregate an empty error list")
    n = len(errors)
    sd = statistics.stdev(errors) if n >= 2 else 0.0
    return AggregateStats(
        mean=statistics.mean(errors),
        median=float(statistics.median(errors)),
        ci95_halfwidth=1.96 * sd / math.sqrt(n),
        n=n,
    )


@dataclass(frozen=True)
class CurvePoint:
    """Correctness rate among samples whose prompt length is below a threshold."""

    length_threshold: int
    correctness_rate: float
    n_samples: int

    def __post_init__(self) -> None:
        _require(self.n_samples >= 1, "a curve point needs at least one sample")
        _require(0.0 <= self.correctness_rate <= 1.0, "rate must lie in [0, 1]")


def correctness_curve(
    samples: list[tuple[int, bool]], thresholds: list[int]
) -> list[CurvePoint]:
    """Cumulative correctness-vs-prompt-length curve.

    Each point at threshold i covers samples with prompt_tokens < i; thresholds
    with no qualifying samples are omitted.
    """
    if not samples:
        raise InvariantViolation("samples must be non-empty")
    if any(a > b for a, b in zip(thresholds, thresholds[1:])):
        raise InvariantViolation("thresholds must be sorted ascending")
    points = []
    for threshold in thresholds:
        qualifying = [correct for tokens, correct in samples if tokens < threshold]
        if not qualifying:
            continue
        points.append(
            CurvePoint(
                length_threshold=threshold,
                correctness_rate=sum(qualifying) / len(qualifying),
                n_samples=len(qualifying),
            )
        )
    return points


def curve_to_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["length_threshold", "correctness_rate", "n_samples"])
    for p in points:
        writer.writerow([p.length_threshold, f"{p.correctness_rate:.6f}", p.n_samples])
    return buf.getvalue()


@dataclass(frozen=True)
class BackendReport:
    n_records: int
    n_possible: int
    possible_rate: float
    n_correct: int
    correctness_rate_among_possible: float | None


@dataclass(frozen=True)
class ConsolidationReport:
    possible_rate: float
    correctness_rate_among_possible: float | None
    n_records: int
    n_possible: int
    n_correct: int
    per_backend: dict[str, BackendReport]


def _gold_for(record: ConsolidationRecord, gold: dict[str, str]) -> str | None:
    reviewed = record.gold_text
    if reviewed is not None:
        return reviewed
    return gold.get(record.id)


def consolidation_report(
    records: list[ConsolidationRecord],
    gold: dict[str, str] | None = None,
    *,
    on_missing_gold: str = "error",
) -> ConsolidationReport:
    """Possible-consolidation and correctness rates, overall and per backend.

    Gold comes from an amended review (preferred), an approval (prediction
    adopted), or the supplied map. With ``on_missing_gold="error"`` a possible
    record with no gold anywhere raises MissingGold; ``"skip"`` leaves such
    records out of the correctness denominator (mid-review stats).
    """
    if not records:
        raise InvariantViolation("records must be non-empty")
    gold = gold or {}

    missing = tuple(
        r.id for r in records if r.gate.is_possible and _gold_for(r, gold) is None
    )
    if missing and on_missing_gold == "error":
        raise MissingGold(missing)

    def summarize(group: list[ConsolidationRecord]) -> BackendReport:
        possible = [r for r in group if r.gate.is_possible]
        scored = [r for r in possible if _gold_for(r, gold) is not None]
        correct = sum(
            1
            for r in scored
            if r.prediction is not None and is_correct(r.prediction, _gold_for(r, gold) or "")
        )
        denominator = len(scored)
        return BackendReport(
            n_records=len(group),
            n_possible=len(possible),
            possible_rate=len(possible) / len(group),
            n_correct=correct,
            correctness_rate_among_possible=(correct / denominator) if denominator else None,
        )

    overall = summarize(records)
    grouped: dict[str, list[ConsolidationRecord]] = {}
    for record in records:
        grouped.setdefault(record.backend.label, []).append(record)
    per_backend = {label: summarize(grouped[label]) for label in sorted(grouped)}

    return ConsolidationReport(
        possible_rate=overall.possible_rate,
        correctness_rate_among_possible=overall.correctness_rate_among_possible,
        n_records=overall.n_records,
        n_possible=overall.n_possible,
        n_correct=overall.n_correct,
        per_backend=per_backend,
    )


_TABLE_HEADERS = (
    "Model",
    "Rate of possible consolidations",
    "Correctness rate among possible consolidations",
)


def format_rate(rate: float | None) -> str:
    return "n/a" if rate is None else f"{100 * rate:.1f}%"


def format_report_table(rows: list[tuple[str, float, float | None]]) -> str:
    """Plain-text table in the same layout as the published consolidation-rate
    table: one row per model, possible rate, correctness rate among possible."""
    rendered = [_TABLE_HEADERS]
    rendered.extend((label, format_rate(possible), format_rate(correct)) for label, possible, correct in rows)
    widths = [max(len(row[col]) for row in rendered) for col in range(3)]
    lines = []
    for idx, row in enumerate(rendered):
        lines.append("  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[col] for col in range(3)))
    return "\n".join(lines)


def report_table(report: ConsolidationReport) -> str:
    rows = [
        (label, br.possible_rate, br.correctness_rate_among_possible)
        for label, br in report.per_backend.items()
    ]
    return format_report_table(rows)


def report_to_dict(report: ConsolidationReport) -> dict:
    return {
        "possible_rate": report.possible_rate,
        "correctness_rate_among_possible": report.correctness_rate_among_possible,
        "n_records": report.n_records,
        "n_possible": report.n_possible,
        "n_correct": report.n_correct,
        "per_backend": {
            label: {
                "n_records": br.n_records,
                "n_possible": br.n_possible,
                "possible_rate": br.possible_rate,
                "n_correct": br.n_correct,
                "correctness_rate_among_possible": br.correctness_rate_among_possible,
            }
            for label, br in report.per_backend.items()
        },
    }
