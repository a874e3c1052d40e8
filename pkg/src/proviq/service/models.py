"""Pydantic request/response models for the engine service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    mode: str


class QueryRequest(BaseModel):
    video_id: str
    question: str
    options: list[str] | None = None
    question_id: str | None = None
    dry_run: bool = False


class QueryResponse(BaseModel):
    outcome: str
    answer: str | None = None
    raw_answer: str | None = None
    option_index: int | None = None
    program: str | None = None
    prompt_fingerprint: str | None = None
    prompt: str | None = None
    trace: list[dict] | None = None
    error: dict | None = None


class EvalRequest(BaseModel):
    dataset_path: str


class EvalResponse(BaseModel):
    report: dict
    records: list[dict]


class EditRequest(BaseModel):
    video_id: str
    predicate: str = Field(min_length=1)
    mode: str = "remove_matching"


class EditResponse(BaseModel):
    video_id: str
    predicate: str
    mode: str
    segments: list[dict]
    kept_frames: list[int]
    manifest: list[dict]


class TrackRequest(BaseModel):
    video_id: str
    query: str = Field(min_length=1)


class TrackResponse(BaseModel):
    video_id: str
    query: str
    tracks: list[dict]
    export_lines: list[str]


class SummarizeRequest(BaseModel):
    video_id: str
    chunk_seconds: float | None = None


class SummarizeResponse(BaseModel):
    video_id: str
    chunks: list[dict]
    paragraph: str
    prompt_fingerprint: str


class GenProgramRequest(BaseModel):
    question: str
    options: list[str] | None = None
    task_kind: str | None = None      # default: qa, or multiple_choice if options
    question_id: str | None = None


class GenProgramResponse(BaseModel):
    outcome: str                      # generated | generation_failure
    program: str | None = None
    prompt: str
    prompt_fingerprint: str
    diagnostics: list[str] | None = None


class ErrorBody(BaseModel):
    error: str
    detail: str
