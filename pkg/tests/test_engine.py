import json
import os

import pytest

from proviq.config import EngineConfig
from proviq.engine import Engine
from proviq.errors import ConfigError
from proviq.harness import (
    BenchmarkRecord, build_report, chosen_option_index, load_dataset,
    segments_from_kept, truth_option_indices, value_to_text,
)
from proviq.primitives import OptionChoice

SUITE = os.path.join(os.path.dirname(__file__), "..", "assets", "mock_suite")


@pytest.fixture(scope="module")
def engine():
    return Engine(EngineConfig.load(os.path.join(SUITE, "config.json")))


@pytest.fixture(scope="module")
def dataset():
    return load_dataset(os.path.join(SUITE, "dataset.jsonl"))


class TestHarnessPieces:
    def test_value_to_text(self):
        assert value_to_text("Dog.") == "Dog."
        assert value_to_text(True) == "yes"
        assert value_to_text(7) == "7"
        assert value_to_text({"cat": 2, "dog": 1}) == "cat"
        assert value_to_text(OptionChoice(3, "3")) == "3"
        assert value_to_text([1, 2, 3]) == "3"

    def test_truth_option_indices_text_and_index(self):
        record = BenchmarkRecord("q", "v", "?", options=("a", "b", "c"), answers=("b",))
        assert truth_option_indices(record) == {2}
        record = BenchmarkRecord("q", "v", "?", options=("a", "b", "c"), answers=("3",))
        assert truth_option_indices(record) == {3}

    def test_chosen_option_index_forms(self):
        options = ("alpha", "beta", "gamma")
        assert chosen_option_index(OptionChoice(2, "2"), options) == 2
        assert chosen_option_index("beta", options) == 2
        assert chosen_option_index("2", options) == 2
        assert chosen_option_index(2, options) == 2
        assert chosen_option_index("delta", options) is None

    def test_report_counts_sum(self):
        records = [BenchmarkRecord(f"q{i}", "v", "?", answers=("a",)) for i in range(4)]
        from proviq.harness import EvalOutcome
        results = [
            EvalOutcome(record=records[0], outcome="correct"),
            EvalOutcome(record=records[1], outcome="correct"),
            EvalOutcome(record=records[2], outcome="correct"),
            EvalOutcome(record=records[3], outcome="wrong_answer"),
        ]
        report = build_report(results)
        assert report.accuracy == 0.75
        assert sum(report.counts.values()) == report.total == 4

    def test_segments_merge_runs(self):
        segs = segments_from_kept([0, 1, 2, 7, 8, 9], fps=1)
        assert [(s.start_frame, s.end_frame) for s in segs] == [(0, 3), (7, 10)]
        assert segs[0].end_s == 3.0

    def test_dataset_parse_error_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"question_id": "a", "video_id": "v", "question": "?", "answers": ["x"]}\n'
                        "{nope}\n")
        with pytest.raises(ConfigError) as err:
            load_dataset(str(path))
        assert ":2:" in str(err.value)


class TestEvaluate:
    def test_full_suite_scores_100(self, engine, dataset):
        report, results = engine.evaluate(dataset)
        assert report.total == len(dataset) >= 30
        assert report.accuracy == 1.0
        assert report.counts["correct"] == report.total
        assert all(r.outcome == "correct" for r in results)

    def test_per_type_breakdown_present(self, engine, dataset):
        report, _ = engine.evaluate(dataset)
        assert "color" in report.by_type and "number" in report.by_type
        for slot in report.by_type.values():
            assert slot["accuracy"] == 1.0

    def test_generation_failure_has_no_trace_or_calls(self, engine):
        record = BenchmarkRecord("no_such_fixture", "party01", "??", answers=("x",))
        out = engine.answer_record(record)
        assert out.outcome == "generation_failure"
        assert out.trace is None
        assert out.requests == 0

    def test_module_failure_outcome(self, engine, tmp_path):
        # a world without the needed table -> mock miss -> module failure
        record = BenchmarkRecord("party01_q1", "dancers01", "what is the party for?",
                                 answers=("birthday",))
        out = engine.answer_record(record)
        assert out.outcome == "module_failure"
        assert out.trace is not None and out.error["kind"] == "module"

    def test_wrong_answer_outcome(self, engine):
        record = BenchmarkRecord("party01_q1", "party01", "what is the party for?",
                                 answers=("wedding",))
        out = engine.answer_record(record)
        assert out.outcome == "wrong_answer"
        assert out.matched_answer == "birthday"

    def test_postprocess_mismatch_outcome(self):
        # a vocabulary that cannot express the (correct) raw answer
        config = EngineConfig.load(os.path.join(SUITE, "config.json"))
        config = config.model_copy(update={"vocab_mode": "type_based"})
        engine = Engine(config)
        record = BenchmarkRecord("party01_q1", "party01", "what is the party for?",
                                 question_type="number",  # wrong sub-vocabulary on purpose
                                 answers=("birthday",))
        out = engine.answer_record(record)
        assert out.outcome == "postprocess_mismatch"
        assert out.raw_answer == "birthday"
        assert out.matched_answer != "birthday"


class TestQuery:
    def test_answered(self, engine):
        result = engine.query("party01", "what is the party for?", question_id="party01_q1")
        assert result.outcome == "answered"
        assert result.answer == "birthday"
        assert result.trace is not None

    def test_dry_run_executes_nothing(self, engine):
        before = engine.gateway.log_length()
        result = engine.query("party01", "what is the party for?",
                              question_id="party01_q1", dry_run=True)
        assert result.outcome == "answered"
        assert result.program is not None
        assert result.trace is None
        assert engine.gateway.log_length() == before

    def test_multiple_choice_query(self, engine):
        options = ["the weather", "a game they won", "homework", "dinner plans", "a movie"]
        result = engine.query("tv01", "what did they talk about?", options=options,
                              question_id="tv01_q1")
        assert result.option_index == 2
        assert result.answer == "a game they won"

    def test_unknown_video(self, engine):
        with pytest.raises(ConfigError):
            engine.query("nope", "?", question_id="party01_q1")


class TestEdit:
    def test_remove_matching_complement(self, engine):
        # party01: predicate true on frames 2..7 of 10
        result = engine.edit("party01", "is a party happening?", "remove_matching")
        assert [(s["start_frame"], s["end_frame"]) for s in result.segments] == [(0, 2), (8, 10)]
        assert result.kept_frames == [0, 1, 8, 9]

    def test_keep_matching(self, engine):
        result = engine.edit("party01", "is a party happening?", "keep_matching")
        assert [(s["start_frame"], s["end_frame"]) for s in result.segments] == [(2, 8)]
        # fps 2 -> seconds are frames / 2
        assert result.segments[0]["start_s"] == 1.0
        assert result.segments[0]["end_s"] == 4.0

    def test_keep_matching_inner_run(self, engine):
        result = engine.edit("kitchen01", "is the person holding a utensil?", "keep_matching")
        assert [(s["start_frame"], s["end_frame"]) for s in result.segments] == [(10, 20)]

    def test_predicate_never_true_keeps_everything(self, tmp_path):
        world = {"video_id": "still", "fps": 1, "frame_count": 8,
                 "predicates": {"is it moving?": [False] * 8}}
        world_path = tmp_path / "still.json"
        world_path.write_text(json.dumps(world))
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"mock_world": "still.json"}))
        engine = Engine(EngineConfig.load(str(config_path)))
        result = engine.edit("still", "is it moving?", "remove_matching")
        assert [(s["start_frame"], s["end_frame"]) for s in result.segments] == [(0, 8)]
        assert engine.edit("still", "is it moving?", "keep_matching").segments == []

    def test_segment_laws(self, engine):
        kept = engine.edit("kitchen01", "is the stove on?", "keep_matching")
        removed = engine.edit("kitchen01", "is the stove on?", "remove_matching")
        spans = sorted([(s["start_frame"], s["end_frame"])
                        for s in kept.segments + removed.segments])
        # disjoint, sorted, and together they tile the whole video
        assert spans[0][0] == 0
        for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
            assert b1 == a2
        assert spans[-1][1] == 30

    def test_bad_mode(self, engine):
        with pytest.raises(ConfigError):
            engine.edit("party01", "is a party happening?", "banana")


class TestTrack:
    def test_two_dancers(self, engine):
        result = engine.track("dancers01", "dancer")
        assert len(result.tracks) == 2
        assert all(t["length"] == 50 for t in result.tracks)
        assert all(t["first_frame"] == 0 and t["last_frame"] == 49 for t in result.tracks)
        assert len(result.export_lines) == 100
        first = json.loads(result.export_lines[0])
        assert set(first) == {"track_id", "frame", "box", "score"}

    def test_zero_detections_is_empty_success(self, engine):
        result = engine.track("party01", "unicorn")
        assert result.tracks == [] and result.export_lines == []


class TestSummarize:
    def test_hike_summary(self, engine):
        result = engine.summarize("hike01")
        assert len(result.chunks) == 20
        assert result.paragraph.startswith("The video shows a hike")
        assert result.chunks[0] == {"start_s": 0.0, "end_s": 1.0,
                                    "caption": "setting out: a hike up a mountain trail"}

    def test_export_shape(self, engine):
        result = engine.summarize("hike02")
        doc = {"video_id": result.video_id, "chunks": result.chunks,
               "paragraph": result.paragraph}
        text = json.dumps(doc)
        assert "start_s" in text and "paragraph" in text


class TestReproducibility:
    def test_two_runs_identical_json(self, engine, dataset):
        report1, results1 = engine.evaluate(dataset)
        report2, results2 = engine.evaluate(dataset)
        assert json.dumps(report1.to_json_dict(), sort_keys=True) == \
            json.dumps(report2.to_json_dict(), sort_keys=True)
        lines1 = [json.dumps(r.to_json_dict(), sort_keys=True) for r in results1]
        lines2 = [json.dumps(r.to_json_dict(), sort_keys=True) for r in results2]
        assert lines1 == lines2
