import math
import random
import statistics
from functools import lru_cache

import pytest

from consolaw.metrics import (
    AggregateStats,
    EmptyList,
    MissingGold,
    WordErrorReport,
    aggregate,
    consolidation_report,
    correctness_curve,
    curve_to_csv,
    format_report_table,
    is_correct,
    normalize,
    word_error,
)
from consolaw.model import (
    Backend,
    ConsolidationRecord,
    ConsolidationTriplet,
    GateOutcome,
    InvariantViolation,
    ReviewStatus,
)


def brute_force_distance(a: tuple, b: tuple) -> int:
    """Independent oracle: plain recursive edit distance with memoization."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            go(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
            go(i - 1, j) + 1,
            go(i, j - 1) + 1,
        )

    return go(len(a), len(b))


# ---------------------------------------------------------------------------
# normalize


def test_normalize_folds_accents_and_strips_punctuation():
    assert normalize("Éléments,\nvoilà") == "elements voila"


def test_normalize_examples():
    assert normalize("« Assistant. »") == "assistant"
    assert normalize("  Un   deux\t trois  ") == "un deux trois"
    assert normalize("already normalized text") == "already normalized text"


def test_normalize_is_idempotent_on_random_unicode():
    rng = random.Random(7)
    alphabet = "aàâbcçdeéèêëfghiîïjklmnoôöpqrstuùûüvwxyzœæ ABC«»,;.!?–—'\"\n\t0123456789°"
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        once = normalize(text)
        assert normalize(once) == once


# ---------------------------------------------------------------------------
# word_error


def test_word_error_identical_texts():
    report = word_error("Même texte, ici.", "Même texte, ici.")
    assert (report.additions, report.deletions, report.substitutions, report.total) == (0, 0, 0, 0)


def test_word_error_substitution_plus_addition():
    report = word_error("a b c d", "a x c")
    assert report.substitutions == 1
    assert report.additions == 1
    assert report.deletions == 0
    assert report.total == 2
    assert report.pred_len_words == 4
    assert report.gold_len_words == 3


def test_word_error_pure_deletion():
    report = word_error("a c", "a b c")
    assert report.deletions == 1
    assert report.total == 1


def test_word_error_total_matches_brute_force_oracle():
    rng = random.Random(42)
    vocabulary = ["un", "deux", "trois", "quatre", "cinq"]
    for _ in range(400):
        pred = tuple(rng.choice(vocabulary) for _ in range(rng.randint(0, 8)))
        gold = tuple(rng.choice(vocabulary) for _ in range(rng.randint(0, 8)))
        report = word_error(" ".join(pred), " ".join(gold))
        assert report.total == brute_force_distance(pred, gold)
        assert report.total == report.additions + report.deletions + report.substitutions


def test_word_error_symmetric_up_to_swapping_adds_and_dels():
    rng = random.Random(43)
    vocabulary = ["aa", "bb", "cc", "dd"]
    for _ in range(200):
        x = " ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 7)))
        y = " ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 7)))
        fwd = word_error(x, y)
        rev = word_error(y, x)
        assert fwd.total == rev.total
        assert fwd.additions == rev.deletions
        assert fwd.deletions == rev.additions


def test_word_error_triangle_bound():
    rng = random.Random(44)
    vocabulary = ["aa", "bb", "cc"]
    for _ in range(150):
        texts = [
            " ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 6))) for _ in range(3)
        ]
        ab = word_error(texts[0], texts[1]).total
        bc = word_error(texts[1], texts[2]).total
        ac = word_error(texts[0], texts[2]).total
        assert ac <= ab + bc


def test_word_error_report_invariants():
    with pytest.raises(InvariantViolation):
        WordErrorReport(additions=1, deletions=0, substitutions=0, total=2, pred_len_words=3, gold_len_words=3)


# ---------------------------------------------------------------------------
# is_correct


def test_is_correct_ignores_accents_and_commas():
    assert is_correct("Précisé, ainsi", "Precise ainsi")


def test_is_correct_reflexive_and_sensitive():
    assert is_correct("tout texte", "tout texte")
    assert not is_correct("un mot", "un mots")


def test_is_correct_implies_zero_word_error():
    rng = random.Random(45)
    for _ in range(100):
        text = " ".join(rng.choice(["Él", "la", "côte"]) for _ in range(rng.randint(1, 6)))
        assert is_correct(text, text)
        assert word_error(text, text).total == 0


# ---------------------------------------------------------------------------
# aggregate


def test_aggregate_single_value():
    stats = aggregate([5])
    assert stats.mean == 5
    assert stats.median == 5
    assert stats.ci95_halfwidth == 0
    assert stats.n == 1


def test_aggregate_even_count_median_midpoint():
    stats = aggregate([0, 10])
    assert stats.mean == 5
    assert stats.median == 5


def test_aggregate_matches_reference_formulas():
    rng = random.Random(46)
    for _ in range(100):
        values = [rng.randint(0, 50) for _ in range(rng.randint(2, 30))]
        stats = aggregate(values)
        assert math.isclose(stats.mean, sum(values) / len(values), abs_tol=1e-9)
        assert math.isclose(stats.median, statistics.median(values), abs_tol=1e-9)
        expected_ci = 1.96 * statistics.stdev(values) / math.sqrt(len(values))
        assert math.isclose(stats.ci95_halfwidth, expected_ci, abs_tol=1e-9)


def test_aggregate_empty_raises():
    with pytest.raises(EmptyList):
        aggregate([])


# ---------------------------------------------------------------------------
# correctness_curve


def test_curve_three_sample_fixture():
    samples = [(500, True), (800, False), (1200, True)]
    points = correctness_curve(samples, [1000, 2000])
    assert [(p.length_threshold, p.correctness_rate, p.n_samples) for p in points] == [
        (1000, 0.5, 2),
        (2000, 2 / 3, 3),
    ]


def test_curve_all_correct():
    samples = [(100, True), (300, True), (900, True)]
    for point in correctness_curve(samples, [200, 400, 1000]):
        assert point.correctness_rate == 1.0


def test_curve_omits_empty_thresholds():
    points = correctness_curve([(500, True)], [100, 600])
    assert [p.length_threshold for p in points] == [600]


def test_curve_final_point_equals_overall_rate():
    rng = random.Random(47)
    for _ in range(50):
        samples = [(rng.randint(1, 999), rng.random() < 0.5) for _ in range(rng.randint(1, 40))]
        points = correctness_curve(samples, [1000])
        overall = sum(c for _, c in samples) / len(samples)
        assert points[-1].correctness_rate == pytest.approx(overall)
        assert points[-1].n_samples == len(samples)


def test_curve_csv_layout():
    csv_text = curve_to_csv(correctness_curve([(10, True)], [100]))
    lines = csv_text.strip().split("\n")
    assert lines[0].strip() == "length_threshold,correctness_rate,n_samples"
    assert lines[1].startswith("100,1.000000,1")


# ---------------------------------------------------------------------------
# consolidation_report


def _record(rid, backend, gate, prediction=None, review=None, error=None):
    return ConsolidationRecord(
        id=rid,
        triplet=ConsolidationTriplet(instruction="i", input="x"),
        backend=backend,
        gate=gate,
        prediction=prediction,
        review_status=review or ReviewStatus.pending(),
        error=error,
    )


def test_report_counts_possible_and_correct():
    records = [
        _record("1", Backend.rule(), GateOutcome.possible(), prediction="good text"),
        _record("2", Backend.rule(), GateOutcome.possible(), prediction="bad text"),
        _record("3", Backend.rule(), GateOutcome.excluded_table()),
        _record("4", Backend.rule(), GateOutcome.excluded_length(2048)),
    ]
    gold = {"1": "good text", "2": "other text"}
    report = consolidation_report(records, gold)
    assert report.possible_rate == 0.5
    assert report.correctness_rate_among_possible == 0.5
    assert report.n_records == 4


def test_report_all_excluded_is_not_applicable():
    records = [
        _record("1", Backend.rule(), GateOutcome.excluded_table()),
        _record("2", Backend.rule(), GateOutcome.excluded_length(4000)),
    ]
    report = consolidation_report(records, {})
    assert report.possible_rate == 0
    assert report.correctness_rate_among_possible is None


def test_report_prefers_amended_gold_over_map():
    record = _record(
        "1", Backend.rule(), GateOutcome.possible(), prediction="pred text",
        review=ReviewStatus.amended("pred text"),
    )
    report = consolidation_report([record], {"1": "different gold"})
    assert report.correctness_rate_among_possible == 1.0


def test_report_missing_gold_raises_with_ids():
    records = [
        _record("a", Backend.rule(), GateOutcome.possible(), prediction="p"),
        _record("b", Backend.rule(), GateOutcome.possible(), prediction="p"),
    ]
    with pytest.raises(MissingGold) as exc_info:
        consolidation_report(records, {"a": "p"})
    assert exc_info.value.ids == ("b",)


def test_report_skip_mode_keeps_partial_stats():
    records = [
        _record("a", Backend.rule(), GateOutcome.possible(), prediction="p"),
        _record("b", Backend.rule(), GateOutcome.possible(), prediction="q"),
    ]
    report = consolidation_report(records, {"a": "p"}, on_missing_gold="skip")
    assert report.correctness_rate_among_possible == 1.0


def test_report_per_backend_breakdown():
    records = [
        _record("1", Backend.rule(), GateOutcome.possible(), prediction="t"),
        _record("2", Backend.llm("gpt-4"), GateOutcome.excluded_table()),
    ]
    report = consolidation_report(records, {"1": "t"})
    assert set(report.per_backend) == {"rule", "llm:gpt-4"}
    assert report.per_backend["rule"].possible_rate == 1.0
    assert report.per_backend["llm:gpt-4"].possible_rate == 0.0


def test_report_errored_possible_record_counts_as_incorrect():
    records = [
        _record("1", Backend.rule(), GateOutcome.possible(), error="UnrecognizedPattern"),
        _record("2", Backend.rule(), GateOutcome.possible(), prediction="t"),
    ]
    report = consolidation_report(records, {"1": "gold", "2": "t"})
    assert report.correctness_rate_among_possible == 0.5


def test_format_report_table_paper_layout():
    table = format_report_table([("Our model", 0.498, 0.632), ("GPT4-0613", 0.913, 0.614)])
    lines = table.split("\n")
    assert lines[0].startswith("Model")
    assert "Rate of possible consolidations" in lines[0]
    assert "Correctness rate among possible consolidations" in lines[0]
    assert lines[2].startswith("Our model")
    assert "49.8%" in lines[2] and "63.2%" in lines[2]
    assert lines[3].startswith("GPT4-0613")
    assert "91.3%" in lines[3] and "61.4%" in lines[3]


def test_format_report_table_not_applicable_marker():
    table = format_report_table([("rule", 0.0, None)])
    assert "n/a" in table


def test_report_table_renders_from_computed_report():
    from consolaw.metrics import report_table

    records = [
        _record("1", Backend.rule(), GateOutcome.possible(), prediction="good"),
        _record("2", Backend.rule(), GateOutcome.excluded_table()),
    ]
    report = consolidation_report(records, {"1": "good"})
    table = report_table(report)
    assert "rule" in table
    assert "50.0%" in table      # possible rate
    assert "100.0%" in table     # correctness among possible
