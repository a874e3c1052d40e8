"""The visual operations generated programs dispatch to: frame filtering,
region finding, frame-wise voting, captioning, transcripts and LLM option
choice. Everything rides on the capability gateway; per-frame requests fan
out concurrently but results are reassembled in frame order, so concurrency
never changes an output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .clips import FrameRef, SourceVideo, VideoClip
from .errors import BackendUnavailable, InvalidArgument, MalformedResponse, MockMiss, ModuleError
from .gateway import Box, Capability, CapabilityRequest, Gateway
from .textnorm import normalize_answer


@dataclass(frozen=True)
class Crop:
    """A detector crop: parent frame, normalized box, detector score."""

    frame: FrameRef
    box: Box
    score: float


@dataclass(frozen=True)
class CropClip:
    """An ordered collection of crops (frame-major, score-descending within a
    frame). Behaves like a clip for querying; queries are conditioned on the
    crop region."""

    source: SourceVideo
    crops: tuple[Crop, ...] = ()

    @property
    def num_frames(self) -> int:
        return len(self.crops)


@dataclass
class RunContext:
    """Everything a primitive needs at run time."""

    gateway: Gateway
    video: SourceVideo
    options: list[str] = field(default_factory=list)
    detect_threshold: float = 0.35
    chunk_seconds: float = 1.0
    llm_max_tokens: int = 512
    tracker_params: object | None = None  # tracking.TrackerParams


def _qa_request(ctx: RunContext, frame: FrameRef, question: str, box: Box | None = None) -> CapabilityRequest:
    return CapabilityRequest(Capability.IMAGE_QA, video_id=frame.video_id,
                             frame=frame.index, text=question, box=box)


def _items(clip: VideoClip | CropClip) -> list[tuple[FrameRef, Box | None]]:
    if isinstance(clip, CropClip):
        return [(c.frame, c.box) for c in clip.crops]
    return [(f, None) for f in clip.frames]


def _rebuild(clip: VideoClip | CropClip, keep: list[int]):
    if isinstance(clip, CropClip):
        return CropClip(clip.source, tuple(clip.crops[i] for i in keep))
    return VideoClip(clip.source, clip.start, clip.end, tuple(clip.frames[i] for i in keep))


def filter_property(ctx: RunContext, clip: VideoClip | CropClip, property_text: str):
    """Keep the ordered subsequence of frames where the yes/no question is
    answered with a leading "yes"."""
    if not property_text:
        raise InvalidArgument("filter_property: empty property")
    items = _items(clip)
    requests = [_qa_request(ctx, f, property_text, box) for f, box in items]
    try:
        responses = ctx.gateway.call_many(requests)
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError("filter_property", "BackendFailure", str(exc)) from exc
    keep = [i for i, resp in enumerate(responses)
            if normalize_answer(resp.answer()).startswith("yes")]
    return _rebuild(clip, keep)


def _detect(ctx: RunContext, op: str, frames: list[FrameRef], object_text: str) -> list[list[tuple[Box, float]]]:
    requests = [CapabilityRequest(Capability.DETECT, video_id=f.video_id,
                                  frame=f.index, text=object_text) for f in frames]
    try:
        responses = ctx.gateway.call_many(requests)
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError(op, "BackendFailure", str(exc)) from exc
    return [resp.boxes() for resp in responses]


def filter_object(ctx: RunContext, clip: VideoClip | CropClip, object_text: str):
    """Keep frames where the detector finds the object at or above the
    configured score threshold."""
    if not object_text:
        raise InvalidArgument("filter_object: empty object")
    items = _items(clip)
    per_frame = _detect(ctx, "filter_object", [f for f, _ in items], object_text)
    keep = [i for i, boxes in enumerate(per_frame)
            if any(score >= ctx.detect_threshold for _, score in boxes)]
    return _rebuild(clip, keep)


def find(ctx: RunContext, clip: VideoClip | CropClip, object_text: str) -> CropClip:
    """All above-threshold crops of the object, ordered by frame then by
    descending score within a frame."""
    if not object_text:
        raise InvalidArgument("find: empty object")
    if isinstance(clip, CropClip):
        frames, seen = [], set()
        for c in clip.crops:
            if c.frame.index not in seen:
                seen.add(c.frame.index)
                frames.append(c.frame)
    else:
        frames = list(clip.frames)
    per_frame = _detect(ctx, "find", frames, object_text)
    crops: list[Crop] = []
    for frame, boxes in zip(frames, per_frame):
        hits = [(box, score) for box, score in boxes if score >= ctx.detect_threshold]
        hits.sort(key=lambda bs: -bs[1])
        crops.extend(Crop(frame, box, score) for box, score in hits)
    return CropClip(clip.source, tuple(crops))


def video_query(ctx: RunContext, clip: VideoClip | CropClip, query: str,
                possible_answers: list[str] | None = None) -> dict[str, int]:
    """Ask the question on every frame (or crop) and tally normalized answers
    in first-occurrence order. The vote itself is taken by get_max_key."""
    items = _items(clip)
    if not items:
        raise ModuleError("video_query", "EmptyClip", "cannot query an empty clip")
    requests = [_qa_request(ctx, f, query, box) for f, box in items]
    try:
        responses = ctx.gateway.call_many(requests)
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError("video_query", "BackendFailure", str(exc)) from exc
    counts: dict[str, int] = {}
    for resp in responses:
        key = normalize_answer(resp.answer())
        counts[key] = counts.get(key, 0) + 1
    return counts


def get_caption(ctx: RunContext, clip: VideoClip | CropClip, index: int) -> str:
    if not 0 <= index < clip.num_frames:
        raise ModuleError("get_caption", "IndexOutOfRange",
                          f"index {index} outside [0, {clip.num_frames})")
    frame = clip.crops[index].frame if isinstance(clip, CropClip) else clip.frames[index]
    request = CapabilityRequest(Capability.CAPTION_IMAGE, video_id=frame.video_id, frame=frame.index)
    try:
        return ctx.gateway.call(request).caption()
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError("get_caption", "BackendFailure", str(exc), frame=frame.index) from exc


def get_script(ctx: RunContext, clip: VideoClip | CropClip) -> str:
    """Whole-video transcript regardless of the clip window: sidecar text if
    the source carries one, otherwise the transcription backend."""
    if ctx.video.transcript is not None:
        return ctx.video.transcript
    request = CapabilityRequest(Capability.TRANSCRIBE, video_id=ctx.video.video_id)
    if not ctx.gateway.supports(Capability.TRANSCRIBE):
        raise ModuleError("get_script", "NoTranscript", "no transcript and no transcription backend")
    try:
        return ctx.gateway.call(request).text()
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError("get_script", "NoTranscript", str(exc)) from exc


@dataclass(frozen=True)
class OptionChoice:
    """A chosen option: 1-based index plus the model's raw response."""

    index: int
    rationale: str


CHOOSER_PROMPT_VERSION = "chooser-v1"

_CHOICE_RE = re.compile(r"^\s*(?:option\s*)?(\d+)", re.IGNORECASE)


def render_context_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, dict):
        return ", ".join(f"{k}: {v}" for k, v in value.items())
    if isinstance(value, (VideoClip, CropClip)):
        return f"a clip of {value.num_frames} frames"
    if isinstance(value, list):
        return "; ".join(render_context_value(v) for v in value)
    return str(value)


def build_chooser_prompt(question: str, context: dict[str, object], options: list[str]) -> str:
    lines = [
        "Answer the multiple choice question using the context below.",
        "Reply with the number of the best option.",
        "",
        f"Question: {question}",
        "Options:",
    ]
    lines.extend(f"{i}. {opt}" for i, opt in enumerate(options, start=1))
    if context:
        lines.append("Context:")
        lines.extend(f"[{label}] {render_context_value(value)}" for label, value in context.items())
    return "\n".join(lines)


def parse_choice(response: str, num_options: int) -> int | None:
    m = _CHOICE_RE.match(response)
    if not m:
        return None
    idx = int(m.group(1))
    if not 1 <= idx <= num_options:
        return None
    return idx


def choose_option(ctx: RunContext, question: str, context: dict[str, object],
                  options: list[str]) -> OptionChoice:
    """Build the fixed chooser prompt, ask the LLM and parse the leading
    1-based option number; reprompts exactly once on an unparseable reply."""
    if not options:
        raise ModuleError("choose_option", "NoOptions", "options list is empty")
    prompt = build_chooser_prompt(question, context, options)
    response = _llm(ctx, "choose_option", prompt)
    idx = parse_choice(response, len(options))
    if idx is None:
        retry_prompt = prompt + "\n\nAnswer with the option number only."
        response = _llm(ctx, "choose_option", retry_prompt)
        idx = parse_choice(response, len(options))
        if idx is None:
            raise ModuleError("choose_option", "UnparseableChoice",
                              f"could not parse an option number from {response[:80]!r}")
    return OptionChoice(idx, response)


def _llm(ctx: RunContext, op: str, prompt: str) -> str:
    request = CapabilityRequest(Capability.LLM_COMPLETE, video_id=ctx.video.video_id,
                                text=prompt, max_tokens=ctx.llm_max_tokens)
    try:
        return ctx.gateway.call(request).text()
    except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
        raise ModuleError(op, "BackendFailure", str(exc)) from exc
