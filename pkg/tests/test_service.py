import os

import pytest
from fastapi.testclient import TestClient

from proviq.config import EngineConfig
from proviq.service import create_app

SUITE = os.path.join(os.path.dirname(__file__), "..", "assets", "mock_suite")


@pytest.fixture(scope="module")
def client():
    config = EngineConfig.load(os.path.join(SUITE, "config.json"))
    return TestClient(create_app(config))


class TestServiceEndpoints:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "mode": "mock"}

    def test_query(self, client):
        resp = client.post("/v1/query", json={
            "video_id": "party01", "question": "what is the party for?",
            "question_id": "party01_q1",
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["outcome"] == "answered"
        assert body["answer"] == "birthday"
        assert body["trace"][-1]["outcome"] == "ok"

    def test_query_dry_run(self, client):
        resp = client.post("/v1/query", json={
            "video_id": "party01", "question": "what is the party for?",
            "question_id": "party01_q1", "dry_run": True,
        })
        body = resp.json()
        assert body["outcome"] == "answered"
        assert body["trace"] is None
        assert "filter_property" in body["prompt"]

    def test_query_generation_failure_in_band(self, client):
        resp = client.post("/v1/query", json={
            "video_id": "party01", "question": "??", "question_id": "missing",
        })
        assert resp.status_code == 200
        assert resp.json()["outcome"] == "generation_failure"

    def test_eval(self, client):
        resp = client.post("/v1/eval", json={
            "dataset_path": os.path.join(SUITE, "dataset.jsonl"),
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["report"]["accuracy"] == 1.0
        assert len(body["records"]) == body["report"]["total"]

    def test_edit(self, client):
        resp = client.post("/v1/edit", json={
            "video_id": "party01", "predicate": "is a party happening?",
            "mode": "keep_matching",
        })
        assert resp.status_code == 200
        assert [(s["start_frame"], s["end_frame"])
                for s in resp.json()["segments"]] == [(2, 8)]

    def test_track(self, client):
        resp = client.post("/v1/track", json={"video_id": "dancers01", "query": "dancer"})
        assert resp.status_code == 200
        assert len(resp.json()["tracks"]) == 2

    def test_summarize(self, client):
        resp = client.post("/v1/summarize", json={"video_id": "hike01"})
        assert resp.status_code == 200
        assert len(resp.json()["chunks"]) == 20

    def test_gen_program(self, client):
        resp = client.post("/v1/gen-program", json={
            "question": "what is the party for?", "question_id": "party01_q1",
        })
        body = resp.json()
        assert body["outcome"] == "generated"
        assert "def answer_question" in body["program"]
        assert len(body["prompt_fingerprint"]) == 64


class TestServiceErrors:
    def test_validation_error_is_422(self, client):
        resp = client.post("/v1/query", json={"video_id": "party01"})
        assert resp.status_code == 422

    def test_unknown_video_is_config_error(self, client):
        resp = client.post("/v1/query", json={
            "video_id": "nope", "question": "?", "question_id": "party01_q1",
        })
        assert resp.status_code == 400
        assert resp.json()["error"] == "config_error"

    def test_module_failure_surfaces_as_502(self, client):
        # party worlds carry no transcript: transcription misses
        resp = client.post("/v1/edit", json={
            "video_id": "party01", "predicate": "is the stove on?",
            "mode": "keep_matching",
        })
        assert resp.status_code == 502
        assert resp.json()["error"] == "module_failure"

    def test_empty_predicate_rejected_by_schema(self, client):
        resp = client.post("/v1/edit", json={"video_id": "party01", "predicate": ""})
        assert resp.status_code == 422
