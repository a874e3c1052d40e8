"""FastAPI service wrapping the engine: configure once at startup, serve
query/eval/edit/track/summarize/gen-program to any number of clients.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..config import EngineConfig
from ..engine import Engine
from ..errors import ConfigError, ModuleError, ProviqError
from . import api
from . import models as m


def create_app(config: EngineConfig) -> FastAPI:
    engine = Engine(config)
    app = FastAPI(title="proviq engine", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(ConfigError)
    async def config_error(_req: Request, exc: ConfigError):
        return JSONResponse(status_code=400,
                            content={"error": "config_error", "detail": str(exc)})

    @app.exception_handler(ModuleError)
    async def module_error(_req: Request, exc: ModuleError):
        return JSONResponse(status_code=502,
                            content={"error": "module_failure", "detail": str(exc)})

    @app.exception_handler(ProviqError)
    async def engine_error(_req: Request, exc: ProviqError):
        return JSONResponse(status_code=500,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health", response_model=m.HealthResponse)
    def health() -> m.HealthResponse:
        mode = "remote" if config.backend.endpoint else "mock"
        return m.HealthResponse(mode=mode)

    @app.post("/v1/query", response_model=m.QueryResponse)
    def query(req: m.QueryRequest) -> m.QueryResponse:
        return api.handle_query(engine, req)

    @app.post("/v1/eval", response_model=m.EvalResponse)
    def evaluate(req: m.EvalRequest) -> m.EvalResponse:
        return api.handle_eval(engine, req)

    @app.post("/v1/edit", response_model=m.EditResponse)
    def edit(req: m.EditRequest) -> m.EditResponse:
        return api.handle_edit(engine, req)

    @app.post("/v1/track", response_model=m.TrackResponse)
    def track(req: m.TrackRequest) -> m.TrackResponse:
        return api.handle_track(engine, req)

    @app.post("/v1/summarize", response_model=m.SummarizeResponse)
    def summarize(req: m.SummarizeRequest) -> m.SummarizeResponse:
        return api.handle_summarize(engine, req)

    @app.post("/v1/gen-program", response_model=m.GenProgramResponse)
    def gen_program(req: m.GenProgramRequest) -> m.GenProgramResponse:
        return api.handle_gen_program(engine, req)

    return app
