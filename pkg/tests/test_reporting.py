import json
from fractions import Fraction
from pathlib import Path

import pytest

from langmix.harness import GenerationRecord, score_generations
from langmix.reporting import (
    EvalReport,
    fixed4,
    parse_csv,
    render,
    render_csv,
    render_json,
    render_markdown,
    report_from_json,
    trim_decimal,
)

GOLDEN = Path(__file__).parent / "data" / "golden_report.md"


def golden_records():
    """Six records whose statistics are small enough to verify by hand."""
    base_texts = [
        "안녕하세요 세계 좋은 아침",  # wpr 1, lpr 1
        "안녕 world",  # wpr 1/2, single failing sentence: lpr 0
        "hello world",  # wpr 0, lpr 0
    ]
    orpo_texts = ["좋은 아침 입니다", "평화 친구 사랑", "하늘 바다 나무"]
    records = []
    for repeat, text in enumerate(base_texts, 1):
        records.append(GenerationRecord("p0", "smol-1b", "base", 0.7, repeat, text))
    for repeat, text in enumerate(orpo_texts, 1):
        records.append(GenerationRecord("p0", "smol-1b", "orpo", 0.7, repeat, text))
    return records


@pytest.fixture
def report():
    return score_generations(golden_records(), repeats=3)


class TestFixed4:
    def test_exact_rendering(self):
        assert fixed4(Fraction(1, 3)) == "0.3333"
        assert fixed4(Fraction(1, 2)) == "0.5000"
        assert fixed4(Fraction(1)) == "1.0000"
        assert fixed4(Fraction(0)) == "0.0000"
        assert fixed4(Fraction(7, 10)) == "0.7000"
        assert fixed4(Fraction(2, 3)) == "0.6667"

    def test_trim(self):
        assert trim_decimal(Fraction(9, 10)) == "0.9"
        assert trim_decimal(Fraction(1)) == "1"
        assert trim_decimal(Fraction(17, 20)) == "0.85"


class TestReportValues:
    def test_hand_computed_statistics(self, report):
        base, orpo = report.rows
        assert (base.model, base.method, base.temperature) == ("smol-1b", "base", 0.7)
        assert base.score.mean_wpr == Fraction(1, 2)
        assert base.score.mean_lpr == Fraction(1, 3)
        assert base.score.wpr_over_threshold_ratio == Fraction(1, 3)
        assert base.score.lpr_over_threshold_ratio == Fraction(1, 3)
        assert orpo.method == "orpo"
        assert orpo.score.mean_wpr == 1
        assert orpo.score.mean_lpr == 1

    def test_method_column_order(self):
        rows = score_generations(
            [
                GenerationRecord("p", "m", method, 1.0, 1, "좋은 아침")
                for method in ("orpo", "base", "dpo", "sft")
            ],
            repeats=1,
        ).rows
        assert [r.method for r in rows] == ["base", "sft", "dpo", "orpo"]


class TestRendering:
    def test_markdown_matches_golden(self, report):
        assert render_markdown(report) == GOLDEN.read_bytes()

    def test_markdown_metric_rows(self, report):
        text = render_markdown(report).decode("utf-8")
        for label in ("WPR > 0.9 ratio", "LPR > 0.9 ratio", "Average WPR", "Average LPR"):
            assert text.count(label) == 1
        assert "| 0.3333 | 1.0000 |" in text

    def test_render_deterministic(self, report):
        for fmt in ("markdown", "csv", "json"):
            assert render(report, fmt) == render(report, fmt)

    def test_csv_round_trip(self, report):
        rows = parse_csv(render_csv(report))
        assert len(rows) == len(report.rows)
        for parsed, row in zip(rows, report.rows):
            assert parsed["model"] == row.model
            assert parsed["method"] == row.method
            assert parsed["temperature"] == row.temperature
            assert parsed["n_responses"] == row.score.n_responses
            assert parsed["excluded"] == row.excluded
            for name in (
                "wpr_over_threshold_ratio",
                "lpr_over_threshold_ratio",
                "mean_wpr",
                "mean_lpr",
            ):
                assert parsed[name] == Fraction(fixed4(getattr(row.score, name)))
            assert parsed["threshold"] == report.threshold

    def test_json_round_trip_is_exact(self, report):
        rebuilt = report_from_json(render_json(report))
        assert rebuilt.threshold == report.threshold
        assert rebuilt.repeats == report.repeats
        assert rebuilt.counts == report.counts
        for a, b in zip(rebuilt.rows, report.rows):
            assert a.model == b.model and a.method == b.method
            assert a.temperature == b.temperature
            assert a.excluded == b.excluded
            assert a.score == b.score
        # and the re-render is byte-identical
        assert render_json(rebuilt) == render_json(report)
        assert render_markdown(rebuilt) == render_markdown(report)

    def test_json_carries_exact_fractions(self, report):
        payload = json.loads(render_json(report))
        base_row = payload["rows"][0]
        assert base_row["mean_lpr"] == "0.3333"
        assert base_row["exact"]["mean_lpr"] == "1/3"

    def test_unknown_format(self, report):
        with pytest.raises(ValueError):
            render(report, "pdf")
