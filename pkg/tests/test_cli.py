import json
import os

import pytest
from click.testing import CliRunner

from proviq.cli import main

SUITE = os.path.join(os.path.dirname(__file__), "..", "assets", "mock_suite")
CONFIG = os.path.join(SUITE, "config.json")


@pytest.fixture
def runner():
    return CliRunner()


class TestQueryCommand:
    def test_answer_printed(self, runner):
        result = runner.invoke(main, ["query", "--config", CONFIG, "--video", "party01",
                                      "--question", "what is the party for?",
                                      "--question-id", "party01_q1"])
        assert result.exit_code == 0, result.output
        assert result.output.strip() == "birthday"

    def test_explain_prints_program_and_trace(self, runner):
        result = runner.invoke(main, ["query", "--config", CONFIG, "--video", "party01",
                                      "--question", "what is the party for?",
                                      "--question-id", "party01_q1", "--explain"])
        assert result.exit_code == 0
        assert "filter_property" in result.output
        assert "--- trace ---" in result.output
        assert "outcome: ok" in result.output

    def test_dry_run_prints_prompt_only(self, runner):
        result = runner.invoke(main, ["query", "--config", CONFIG, "--video", "party01",
                                      "--question", "what is the party for?",
                                      "--question-id", "party01_q1", "--dry-run"])
        assert result.exit_code == 0
        assert "--- generated program ---" in result.output
        assert "You can use the following API" in result.output

    def test_generation_failure_exit_code(self, runner):
        result = runner.invoke(main, ["query", "--config", CONFIG, "--video", "party01",
                                      "--question", "??", "--question-id", "missing"])
        assert result.exit_code == 2

    def test_module_failure_exit_code(self, runner):
        # run a party fixture against a world lacking its tables
        result = runner.invoke(main, ["query", "--config", CONFIG, "--video", "dancers01",
                                      "--question", "what is the party for?",
                                      "--question-id", "party01_q1"])
        assert result.exit_code == 3

    def test_config_error_exit_code(self, runner):
        result = runner.invoke(main, ["query", "--config", "/no/such/config.json",
                                      "--video", "v", "--question", "?"])
        assert result.exit_code == 4

    def test_multiple_choice_options(self, runner):
        result = runner.invoke(main, [
            "query", "--config", CONFIG, "--video", "tv01",
            "--question", "what did they talk about?",
            "--options", "the weather|a game they won|homework|dinner plans|a movie",
            "--question-id", "tv01_q1",
        ])
        assert result.exit_code == 0
        assert result.output.strip() == "a game they won"


class TestEvalCommand:
    def test_writes_report_and_records(self, runner, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, ["eval", "--config", CONFIG,
                                      "--dataset", os.path.join(SUITE, "dataset.jsonl"),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "accuracy 1.0000" in result.output
        report = json.loads((out / "report.json").read_text())
        assert report["accuracy"] == 1.0
        lines = (out / "records.jsonl").read_text().splitlines()
        assert len(lines) == report["total"]

    def test_byte_identical_consecutive_runs(self, runner, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            result = runner.invoke(main, ["eval", "--config", CONFIG,
                                          "--dataset", os.path.join(SUITE, "dataset.jsonl"),
                                          "--out", str(out)])
            assert result.exit_code == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        assert (out1 / "records.jsonl").read_bytes() == (out2 / "records.jsonl").read_bytes()


class TestEditCommand:
    def test_segments_printed(self, runner):
        result = runner.invoke(main, ["edit", "--config", CONFIG, "--video", "party01",
                                      "--predicate", "is a party happening?",
                                      "--mode", "remove_matching"])
        assert result.exit_code == 0
        assert "keep [0.000s, 1.000s)" in result.output
        assert "keep [4.000s, 5.000s)" in result.output

    def test_module_failure_exit(self, runner):
        result = runner.invoke(main, ["edit", "--config", CONFIG, "--video", "party01",
                                      "--predicate", "is the stove on?"])
        assert result.exit_code == 3


class TestTrackCommand:
    def test_track_summary_and_export(self, runner, tmp_path):
        out = tmp_path / "tracks.jsonl"
        result = runner.invoke(main, ["track", "--config", CONFIG, "--video", "dancers01",
                                      "--query", "dancer", "--out", str(out)])
        assert result.exit_code == 0
        assert "track 1: frames 0..49 (50 boxes)" in result.output
        assert len(out.read_text().splitlines()) == 100

    def test_no_detections_warns_but_succeeds(self, runner):
        result = runner.invoke(main, ["track", "--config", CONFIG, "--video", "party01",
                                      "--query", "unicorn"])
        assert result.exit_code == 0
        assert "no detections" in result.output


class TestSummarizeCommand:
    def test_paragraph_printed(self, runner, tmp_path):
        out = tmp_path / "summary.json"
        result = runner.invoke(main, ["summarize", "--config", CONFIG, "--video", "hike01",
                                      "--out", str(out)])
        assert result.exit_code == 0
        assert "The video shows a hike" in result.output
        doc = json.loads(out.read_text())
        assert len(doc["chunks"]) == 20


class TestGenProgramCommand:
    def test_program_printed(self, runner):
        result = runner.invoke(main, ["gen-program", "--config", CONFIG,
                                      "--question", "what is the party for?",
                                      "--question-id", "party01_q1"])
        assert result.exit_code == 0
        assert "fingerprint: " in result.output
        assert "def answer_question" in result.output

    def test_missing_fixture_exit_code(self, runner):
        result = runner.invoke(main, ["gen-program", "--config", CONFIG,
                                      "--question", "brand new question"])
        assert result.exit_code == 2


class TestRemoteClient:
    def test_cli_against_live_service(self, runner, tmp_path):
        # run the actual HTTP service in a thread and point the CLI at it
        import threading
        import time

        import uvicorn

        from proviq.config import EngineConfig
        from proviq.service import create_app

        config = EngineConfig.load(CONFIG)
        server = uvicorn.Server(uvicorn.Config(create_app(config), host="127.0.0.1",
                                               port=8731, log_level="error"))
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            for _ in range(100):
                if server.started:
                    break
                time.sleep(0.05)
            assert server.started
            result = runner.invoke(main, ["query", "--server", "http://127.0.0.1:8731",
                                          "--video", "party01",
                                          "--question", "what is the party for?",
                                          "--question-id", "party01_q1"])
            assert result.exit_code == 0, result.output
            assert result.output.strip() == "birthday"
        finally:
            server.should_exit = True
            thread.join(timeout=5)
