"""Capability enum and the request/response envelope between engine and backends."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

from ..errors import MalformedResponse


class Capability(str, Enum):
    IMAGE_QA = "image_qa"
    DETECT = "detect"
    CAPTION_IMAGE = "caption_image"
    CAPTION_VIDEO_CHUNK = "caption_video_chunk"
    TRANSCRIBE = "transcribe"
    LLM_COMPLETE = "llm_complete"


Box = tuple[float, float, float, float]  # x1, y1, x2, y2 normalized to [0, 1]


@dataclass(frozen=True)
class CapabilityRequest:
    """One backend request. `request_id` hashes the semantic fields through a
    canonical serialization, so it is stable across runs and field ordering."""

    capability: Capability
    video_id: str | None = None
    frame: int | None = None
    start_frame: int | None = None
    end_frame: int | None = None
    text: str | None = None          # question / object name / prompt
    box: Box | None = None           # crop bounds for region-conditioned QA
    max_tokens: int | None = None

    @property
    def request_id(self) -> str:
        fields = {
            "capability": self.capability.value,
            "video_id": self.video_id,
            "frame": self.frame,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "text": self.text,
            "box": list(self.box) if self.box is not None else None,
            "max_tokens": self.max_tokens,
        }
        canonical = json.dumps({k: v for k, v in fields.items() if v is not None},
                               sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CapabilityResponse:
    """Wire-shaped response payload plus cache provenance."""

    capability: Capability
    payload: dict
    from_cache: bool = False

    # typed accessors over the wire payload

    def answer(self) -> str:
        return self._str_field("answer")

    def caption(self) -> str:
        return self._str_field("caption")

    def text(self) -> str:
        return self._str_field("text")

    def boxes(self) -> list[tuple[Box, float]]:
        raw = self.payload.get("boxes")
        if not isinstance(raw, list):
            raise MalformedResponse(f"{self.capability.value}: missing 'boxes' list")
        out = []
        for i, b in enumerate(raw):
            try:
                box = (float(b["x1"]), float(b["y1"]), float(b["x2"]), float(b["y2"]))
                score = float(b["score"])
            except (KeyError, TypeError, ValueError):
                raise MalformedResponse(f"{self.capability.value}: bad box at index {i}") from None
            validate_box(box, score, where=f"{self.capability.value} box {i}")
            out.append((box, score))
        return out

    def _str_field(self, key: str) -> str:
        v = self.payload.get(key)
        if not isinstance(v, str):
            raise MalformedResponse(f"{self.capability.value}: missing string field {key!r}")
        return v


def validate_box(box: Box, score: float, where: str = "box") -> None:
    x1, y1, x2, y2 = box
    if not (x1 < x2 and y1 < y2):
        raise MalformedResponse(f"{where}: invalid box (need x1 < x2 and y1 < y2)")
    if not 0.0 <= score <= 1.0:
        raise MalformedResponse(f"{where}: score {score} outside [0, 1]")
