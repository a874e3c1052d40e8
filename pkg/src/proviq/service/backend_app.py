"""A FastAPI implementation of the visual-backend wire protocol, serving
answers out of mock worlds. Lets the remote HTTP client be exercised end to
end without any model, and doubles as a reference for real backend servers.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..errors import MockMiss
from ..gateway import Capability, CapabilityRequest, MockWorld, MockWorldBackend


class ImageQABody(BaseModel):
    video_id: str
    frame: int
    question: str
    box: list[float] | None = None


class DetectBody(BaseModel):
    video_id: str
    frame: int
    query: str


class CaptionBody(BaseModel):
    video_id: str
    frame: int


class VideoCaptionBody(BaseModel):
    video_id: str
    start_frame: int
    end_frame: int


class TranscribeBody(BaseModel):
    video_id: str


class LlmBody(BaseModel):
    prompt: str
    max_tokens: int = 512


def create_backend_app(worlds: dict[str, MockWorld]) -> FastAPI:
    backend = MockWorldBackend(worlds)
    app = FastAPI(title="proviq mock backend", version="0.1.0")

    @app.exception_handler(MockMiss)
    async def mock_miss(_req: Request, exc: MockMiss):
        return JSONResponse(status_code=404, content={"error": "not_found", "detail": str(exc)})

    @app.post("/v1/image_qa")
    def image_qa(body: ImageQABody) -> dict:
        box = tuple(body.box) if body.box else None
        return backend.call(CapabilityRequest(Capability.IMAGE_QA, video_id=body.video_id,
                                              frame=body.frame, text=body.question, box=box))

    @app.post("/v1/detect")
    def detect(body: DetectBody) -> dict:
        return backend.call(CapabilityRequest(Capability.DETECT, video_id=body.video_id,
                                              frame=body.frame, text=body.query))

    @app.post("/v1/caption")
    def caption(body: CaptionBody) -> dict:
        return backend.call(CapabilityRequest(Capability.CAPTION_IMAGE, video_id=body.video_id,
                                              frame=body.frame))

    @app.post("/v1/video_caption")
    def video_caption(body: VideoCaptionBody) -> dict:
        return backend.call(CapabilityRequest(Capability.CAPTION_VIDEO_CHUNK,
                                              video_id=body.video_id,
                                              start_frame=body.start_frame,
                                              end_frame=body.end_frame))

    @app.post("/v1/transcribe")
    def transcribe(body: TranscribeBody) -> dict:
        return backend.call(CapabilityRequest(Capability.TRANSCRIBE, video_id=body.video_id))

    @app.post("/v1/llm")
    def llm(body: LlmBody) -> dict:
        return backend.call(CapabilityRequest(Capability.LLM_COMPLETE, text=body.prompt,
                                              max_tokens=body.max_tokens))

    return app
