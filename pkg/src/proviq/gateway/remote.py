"""HTTP/JSON client for remote inference backends.

Wire protocol (POST, JSON bodies):
    /v1/image_qa      {video_id, frame, question[, box]}        -> {answer}
    /v1/detect        {video_id, frame, query}                  -> {boxes: [{x1,y1,x2,y2,score}]}
    /v1/caption       {video_id, frame}                         -> {caption}
    /v1/video_caption {video_id, start_frame, end_frame}        -> {caption}
    /v1/transcribe    {video_id}                                -> {text}
    /v1/llm           {prompt, max_tokens}                      -> {text}
Errors come back as non-2xx with {error, detail}.
"""

from __future__ import annotations

import httpx

from ..errors import BackendUnavailable, MalformedResponse
from .capabilities import Capability, CapabilityRequest

_PATHS = {
    Capability.IMAGE_QA: "/v1/image_qa",
    Capability.DETECT: "/v1/detect",
    Capability.CAPTION_IMAGE: "/v1/caption",
    Capability.CAPTION_VIDEO_CHUNK: "/v1/video_caption",
    Capability.TRANSCRIBE: "/v1/transcribe",
    Capability.LLM_COMPLETE: "/v1/llm",
}


def request_body(request: CapabilityRequest) -> dict:
    cap = request.capability
    if cap == Capability.IMAGE_QA:
        body = {"video_id": request.video_id, "frame": request.frame, "question": request.text}
        if request.box is not None:
            body["box"] = list(request.box)
        return body
    if cap == Capability.DETECT:
        return {"video_id": request.video_id, "frame": request.frame, "query": request.text}
    if cap == Capability.CAPTION_IMAGE:
        return {"video_id": request.video_id, "frame": request.frame}
    if cap == Capability.CAPTION_VIDEO_CHUNK:
        return {"video_id": request.video_id, "start_frame": request.start_frame,
                "end_frame": request.end_frame}
    if cap == Capability.TRANSCRIBE:
        return {"video_id": request.video_id}
    if cap == Capability.LLM_COMPLETE:
        return {"prompt": request.text, "max_tokens": request.max_tokens or 512}
    raise MalformedResponse(f"cannot build request for capability {cap}")


class RemoteBackend:
    """Synchronous client; one instance is shared across worker threads
    (httpx.Client is thread-safe)."""

    def __init__(self, endpoint: str, token: str | None = None, timeout_s: float = 60.0,
                 client: httpx.Client | None = None):
        self.endpoint = endpoint.rstrip("/")
        headers = {}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = client or httpx.Client(
            base_url=self.endpoint, headers=headers, timeout=timeout_s)

    def call(self, request: CapabilityRequest) -> dict:
        path = _PATHS[request.capability]
        try:
            resp = self._client.post(path, json=request_body(request))
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{self.endpoint}{path}", str(exc)) from None
        if resp.status_code < 200 or resp.status_code >= 300:
            detail = ""
            try:
                err = resp.json()
                detail = f"{err.get('error', '')}: {err.get('detail', '')}"
            except ValueError:
                detail = resp.text[:200]
            raise BackendUnavailable(f"{self.endpoint}{path}", f"HTTP {resp.status_code} {detail}")
        try:
            payload = resp.json()
        except ValueError:
            raise MalformedResponse(f"{path}: response body is not JSON") from None
        if not isinstance(payload, dict):
            raise MalformedResponse(f"{path}: response body is not a JSON object")
        return payload

    def close(self) -> None:
        self._client.close()
