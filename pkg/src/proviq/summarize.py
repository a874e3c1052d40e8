"""Long-video narrative summaries: tile the video into fixed-length chunks,
caption each chunk, then fuse the timestamped caption stream into one
paragraph with the language backend.

Chunk arithmetic is exact (rational fps and chunk length), so the chunk
ranges always tile [0, frame_count) disjointly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

from .clips import SourceVideo
from .errors import BackendUnavailable, InvalidArgument, MalformedResponse, MockMiss, ModuleError
from .gateway import Capability, CapabilityRequest, Gateway

CAPTION_UNAVAILABLE = "[caption unavailable]"

SUMMARY_PROMPT_VERSION = "summary-v1"
SUMMARY_PROMPT_HEADER = (
    "Below is a list of timestamped captions covering a video in order.\n"
    "Write one coherent paragraph telling the story of the video, with one\n"
    "sentence for each 5-second interval.\n"
)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


@dataclass(frozen=True)
class ChunkSpan:
    index: int
    start_frame: int
    end_frame: int
    start_s: Fraction
    end_s: Fraction


@dataclass(frozen=True)
class TimedCaption:
    index: int
    start_s: Fraction
    end_s: Fraction
    caption: str


@dataclass(frozen=True)
class NarrativeSummary:
    paragraph: str
    chunk_count: int
    prompt_fingerprint: str


def chunk(video: SourceVideo, chunk_s=1.0) -> list[ChunkSpan]:
    """ceil(duration / chunk_s) half-open frame ranges tiling the video, with
    boundaries at floor(i * chunk_s * fps). The final chunk may be shorter."""
    length = _as_fraction(chunk_s)
    if length <= 0:
        raise InvalidArgument(f"chunk length must be positive, got {chunk_s}")
    duration = video.duration_s
    k = math.ceil(duration / length)
    spans = []
    for i in range(k):
        start = math.floor(i * length * video.fps)
        end = min(math.floor((i + 1) * length * video.fps), video.frame_count)
        spans.append(ChunkSpan(
            index=i, start_frame=start, end_frame=end,
            start_s=i * length, end_s=min((i + 1) * length, duration),
        ))
    return spans


def caption_chunks(gateway: Gateway, video: SourceVideo,
                   spans: list[ChunkSpan]) -> tuple[list[TimedCaption], list[int]]:
    """One caption per chunk, order preserved. A failing chunk degrades to a
    sentinel caption instead of aborting; the failed indices are returned for
    the trace."""
    requests = [CapabilityRequest(Capability.CAPTION_VIDEO_CHUNK, video_id=video.video_id,
                                  start_frame=s.start_frame, end_frame=s.end_frame)
                for s in spans]
    captions: list[TimedCaption] = []
    failed: list[int] = []
    for span, outcome in zip(spans, gateway.call_many_settled(requests)):
        if isinstance(outcome, (BackendUnavailable, MalformedResponse, MockMiss)):
            text = CAPTION_UNAVAILABLE
            failed.append(span.index)
        elif isinstance(outcome, Exception):
            raise outcome
        else:
            text = outcome.caption()
        captions.append(TimedCaption(span.index, span.start_s, span.end_s, text))
    return captions, failed


def build_summary_prompt(captions: list[TimedCaption]) -> str:
    lines = [SUMMARY_PROMPT_HEADER]
    for c in captions:
        lines.append(f"[{float(c.start_s):.1f}s - {float(c.end_s):.1f}s] {c.caption}")
    return "\n".join(lines)


def prompt_fingerprint(prompt: str) -> str:
    return hashlib.sha256(f"{SUMMARY_PROMPT_VERSION}\n{prompt}".encode("utf-8")).hexdigest()


def summarize_captions(gateway: Gateway, video: SourceVideo, captions: list[TimedCaption],
                       max_tokens: int = 1024) -> NarrativeSummary:
    """Fuse an already-captioned chunk stream into the narrative paragraph."""
    if not captions:
        raise ModuleError("get_summary", "SummaryFailed", "no chunk captions to summarize")
    prompt = build_summary_prompt(captions)
    request = CapabilityRequest(Capability.LLM_COMPLETE, video_id=video.video_id,
                                text=prompt, max_tokens=max_tokens)
    try:
        paragraph = gateway.call(request).text()
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError("get_summary", "SummaryFailed", str(exc)) from exc
    return NarrativeSummary(paragraph, len(captions), prompt_fingerprint(prompt))


def get_summary(gateway: Gateway, video: SourceVideo, chunk_s=1.0,
                max_tokens: int = 1024) -> NarrativeSummary:
    spans = chunk(video, chunk_s)
    captions, _failed = caption_chunks(gateway, video, spans)
    return summarize_captions(gateway, video, captions, max_tokens)
