import csv
import json
import random
import subprocess
import sys

import pytest

from conftest import generation_rows, korean_sentence, lexicon_entries, write_jsonl
from langmix.config import ConfigError, load_config, merged
from langmix.diagnostics import synthesize_loss_log


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "langmix.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=120,
    )


def clean_text(p, r):
    rng = random.Random(p * 131 + r)
    return korean_sentence(rng, 8, terminator=".")


@pytest.fixture
def generations_file(tmp_path):
    path = tmp_path / "gen.jsonl"
    write_jsonl(path, generation_rows(4, 3, clean_text))
    return path


class TestConfigFile:
    def test_parse_types(self, tmp_path):
        path = tmp_path / "langmix.toml"
        path.write_text(
            "\n".join(
                [
                    "# harness settings",
                    'endpoint = "http://localhost:9999/generate"',
                    'model = "demo-1b"',
                    "repeats = 3",
                    "timeout = 12.5",
                    "temperatures = [0.7, 1.0, 1.2]",
                    "resume = true  # inline comment",
                    'threshold = "0.9"',
                ]
            ),
            encoding="utf-8",
        )
        values = load_config(path)
        assert values["endpoint"] == "http://localhost:9999/generate"
        assert values["repeats"] == 3
        assert values["timeout"] == 12.5
        assert values["temperatures"] == [0.7, 1.0, 1.2]
        assert values["resume"] is True
        assert values["threshold"] == "0.9"

    def test_sections_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[fetch]\nrepeats = 3\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unquoted_string_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("model = demo\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_cli_overrides_file(self):
        out = merged({"repeats": 5, "model": "file-model"}, {"repeats": 7, "model": None})
        assert out["repeats"] == 7
        assert out["model"] == "file-model"
        assert out["threshold"] == "0.9"  # default survives


class TestScoreCommand:
    def test_writes_all_formats(self, generations_file, tmp_path):
        prefix = tmp_path / "report"
        result = run_cli("score", str(generations_file), "--out-prefix", str(prefix))
        assert result.returncode == 0
        assert "Average WPR" in result.stdout
        md = (tmp_path / "report.md").read_bytes()
        assert md.decode("utf-8").count("| 1.0000 |") >= 1
        rows = list(csv.DictReader((tmp_path / "report.csv").read_text().splitlines()))
        assert rows[0]["mean_wpr"] == "1.0000"
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["metadata"]["counts"]["total"] == 12

    def test_missing_file_is_exit_2(self, tmp_path):
        result = run_cli("score", str(tmp_path / "nope.jsonl"))
        assert result.returncode == 2

    def test_malformed_file_is_exit_2(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("}{ not json\n", encoding="utf-8")
        result = run_cli("score", str(path), "--out-prefix", str(tmp_path / "r"))
        assert result.returncode == 2
        assert "input error" in result.stderr

    def test_usage_error_is_exit_1(self):
        assert run_cli("score").returncode == 1
        assert run_cli("frobnicate").returncode == 1


class TestReportCommand:
    def test_rerender_matches_original(self, generations_file, tmp_path):
        prefix = tmp_path / "report"
        assert run_cli("score", str(generations_file), "--out-prefix", str(prefix), "--quiet").returncode == 0
        result = run_cli("report", str(tmp_path / "report.json"), "--format", "markdown")
        assert result.returncode == 0
        assert result.stdout.encode("utf-8") == (tmp_path / "report.md").read_bytes()

    def test_csv_output_file(self, generations_file, tmp_path):
        prefix = tmp_path / "report"
        run_cli("score", str(generations_file), "--out-prefix", str(prefix), "--quiet")
        out = tmp_path / "again.csv"
        result = run_cli("report", str(tmp_path / "report.json"), "--format", "csv", "--out", str(out))
        assert result.returncode == 0
        assert out.read_bytes() == (tmp_path / "report.csv").read_bytes()


class TestForgeCommand:
    def test_quadruplet_run(self, tmp_path, lexicon_tsv):
        rng = random.Random(17)
        rows = []
        for i in range(8):
            rows.append(
                {
                    "id": f"r{i}",
                    "instruction": f"질문 {i} 입니다",
                    "chosen": korean_sentence(rng, 10),
                    "foreign_response": "An English reference answer goes right here.",
                }
            )
        corpus = tmp_path / "corpus.jsonl"
        write_jsonl(corpus, rows)
        out = tmp_path / "quads.jsonl"
        result = run_cli(
            "forge",
            str(corpus),
            "--mode",
            "quadruplet",
            "--lexicon",
            str(lexicon_tsv),
            "--out",
            str(out),
            "--seed",
            "42",
            "--k",
            "2",
        )
        assert result.returncode == 0, result.stderr
        emitted = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
        assert len(emitted) == 8
        assert all("confusion" in row for row in emitted)
        report = json.loads((tmp_path / "quads.jsonl.report.json").read_text())
        assert report["input"] == 8
        assert report["emitted"] == 8

    def test_code_mixed_needs_lexicon(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        write_jsonl(corpus, [{"id": "a", "instruction": "질문", "chosen": "좋은 아침"}])
        result = run_cli("forge", str(corpus), "--mode", "code-mixed", "--out", str(tmp_path / "o"))
        assert result.returncode == 1
        assert "lexicon" in result.stderr


class TestDiagnoseCommand:
    def test_loss_log_flow(self, tmp_path):
        records = synthesize_loss_log(4, 6, seed=2)
        path = tmp_path / "loss.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["checkpoint_id", "tokens_seen", "example_id", "chosen_loss", "rejected_loss"]
            )
            for rec in records:
                writer.writerow(
                    [rec.checkpoint_id, rec.tokens_seen, rec.example_id,
                     rec.chosen_loss, rec.rejected_loss]
                )
        trajectory_out = tmp_path / "trajectory.csv"
        summary_out = tmp_path / "summary.json"
        result = run_cli(
            "diagnose",
            "--loss-log",
            str(path),
            "--trajectory-out",
            str(trajectory_out),
            "--summary-out",
            str(summary_out),
        )
        assert result.returncode == 0, result.stderr
        assert "delta loss = 0.5000" in result.stdout
        assert len(trajectory_out.read_text().splitlines()) == 5  # header + 4 checkpoints
        summary = json.loads(summary_out.read_text())
        assert summary["n_checkpoints"] == 4

    def test_objective_flow(self, tmp_path):
        chosen = tmp_path / "chosen.jsonl"
        rejected = tmp_path / "rejected.jsonl"
        write_jsonl(
            chosen,
            [{"example_id": "e1", "mean_token_logprob": -0.5, "token_count": 10}],
        )
        write_jsonl(
            rejected,
            [{"example_id": "e1", "mean_token_logprob": -0.5, "token_count": 10}],
        )
        out = tmp_path / "orpo.jsonl"
        result = run_cli(
            "diagnose", "--objective", "orpo", "--chosen", str(chosen),
            "--rejected", str(rejected), "--out", str(out),
        )
        assert result.returncode == 0, result.stderr
        row = json.loads(out.read_text().splitlines()[0])
        assert abs(row["or_term"] - 0.6931471805599453) < 1e-9

    def test_objective_requires_both_files(self, tmp_path):
        result = run_cli("diagnose", "--objective", "dpo", "--chosen", "x.jsonl")
        assert result.returncode == 1

    def test_no_inputs_is_usage_error(self):
        assert run_cli("diagnose").returncode == 1


class TestFetchCommand:
    def test_fetch_with_config_file(self, tmp_path):
        from test_fetch import MockEndpoint

        server = MockEndpoint()
        try:
            prompts = tmp_path / "prompts.jsonl"
            write_jsonl(
                prompts,
                [{"prompt_id": f"p{i}", "text": f"질문 {i}"} for i in range(2)],
            )
            config = tmp_path / "langmix.toml"
            config.write_text(
                "\n".join(
                    [
                        f'endpoint = "{server.url}"',
                        'model = "demo-1b"',
                        'method = "base"',
                        "temperatures = [0.7, 1.0]",
                        "repeats = 2",
                    ]
                ),
                encoding="utf-8",
            )
            out = tmp_path / "gen.jsonl"
            result = run_cli(
                "fetch", "--prompts", str(prompts), "--out", str(out), "--config", str(config)
            )
            assert result.returncode == 0, result.stderr
            assert "fetched 8 records" in result.stdout
            lines = out.read_text(encoding="utf-8").splitlines()
            assert len(lines) == 8
        finally:
            server.close()

    def test_unreachable_endpoint_is_exit_3(self, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        write_jsonl(prompts, [{"prompt_id": "p0", "text": "질문"}])
        result = run_cli(
            "fetch",
            "--endpoint",
            "http://127.0.0.1:9/generate",
            "--model",
            "m",
            "--prompts",
            str(prompts),
            "--out",
            str(tmp_path / "gen.jsonl"),
            "--temperatures",
            "1.0",
            "--repeats",
            "1",
            "--timeout",
            "1.0",
        )
        assert result.returncode == 3
        assert "endpoint failure" in result.stderr

    def test_missing_endpoint_is_usage_error(self, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        write_jsonl(prompts, [{"prompt_id": "p0", "text": "질문"}])
        result = run_cli(
            "fetch", "--prompts", str(prompts), "--out", str(tmp_path / "gen.jsonl")
        )
        assert result.returncode == 1
