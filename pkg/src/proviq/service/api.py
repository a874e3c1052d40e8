"""Transport-independent handlers shared by the HTTP routes and the local
CLI path. Each takes the engine plus a request model and returns a response
model, so both callers see identical serialization semantics.
"""

from __future__ import annotations

from dataclasses import asdict

from ..engine import Engine
from ..errors import GenerationFailure
from ..harness import load_dataset
from . import models as m


def handle_query(engine: Engine, req: m.QueryRequest) -> m.QueryResponse:
    result = engine.query(req.video_id, req.question, req.options,
                          question_id=req.question_id, dry_run=req.dry_run)
    return m.QueryResponse(**asdict(result))


def handle_eval(engine: Engine, req: m.EvalRequest) -> m.EvalResponse:
    records = load_dataset(req.dataset_path)
    report, results = engine.evaluate(records)
    return m.EvalResponse(report=report.to_json_dict(),
                          records=[r.to_json_dict() for r in results])


def handle_edit(engine: Engine, req: m.EditRequest) -> m.EditResponse:
    result = engine.edit(req.video_id, req.predicate, req.mode)
    return m.EditResponse(**asdict(result))


def handle_track(engine: Engine, req: m.TrackRequest) -> m.TrackResponse:
    result = engine.track(req.video_id, req.query)
    return m.TrackResponse(**asdict(result))


def handle_summarize(engine: Engine, req: m.SummarizeRequest) -> m.SummarizeResponse:
    result = engine.summarize(req.video_id, req.chunk_seconds)
    return m.SummarizeResponse(**asdict(result))


def handle_gen_program(engine: Engine, req: m.GenProgramRequest) -> m.GenProgramResponse:
    task_kind = req.task_kind or ("multiple_choice" if req.options else "qa")
    bundle = engine.build_bundle(req.question, req.options, task_kind)
    try:
        source, _program = engine.obtain_program(bundle, req.question_id)
    except GenerationFailure as exc:
        return m.GenProgramResponse(outcome="generation_failure", prompt=bundle.text,
                                    prompt_fingerprint=bundle.fingerprint,
                                    diagnostics=exc.diagnostics)
    return m.GenProgramResponse(outcome="generated", program=source, prompt=bundle.text,
                                prompt_fingerprint=bundle.fingerprint)
