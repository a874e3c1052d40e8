"""Deterministic mock-world oracle: a fully tabulated stand-in for a video
plus every backend response, enabling desk-scale testing and controlled
fault injection.

World files are one JSON document per video. Tables are total over the
declared frames: a `captions` array must cover every frame, every predicate
and QA array must have frame_count entries, and so on; gaps are authoring
errors reported at load with a JSON-pointer-style path.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InvalidArgument, MockMiss, WorldFormatError
from ..textnorm import normalize_answer
from .capabilities import Box, Capability, CapabilityRequest

CORRUPTED_TEXT = "corrupted response"
GARBLED_TEXT = "garbled output"

_BOX_EPS = 1e-6


def parse_fps(value) -> Fraction:
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    raise WorldFormatError("/fps", f"cannot parse fps from {value!r}")


@dataclass
class ScoredBox:
    box: Box
    score: float


@dataclass
class CropQA:
    frame: int
    box: Box
    answers: dict[str, str]  # normalized question -> answer


@dataclass
class ChunkCaption:
    start_frame: int
    end_frame: int
    caption: str


@dataclass
class LlmRule:
    text: str
    contains: str | None = None
    sha256: str | None = None

    def matches(self, prompt: str, prompt_sha: str) -> bool:
        if self.sha256 is not None:
            return self.sha256 == prompt_sha
        if self.contains is not None:
            return self.contains in prompt
        return False


@dataclass
class MockWorld:
    video_id: str
    fps: Fraction
    frame_count: int
    transcript: str | None = None
    captions: list[str] | None = None                       # len == frame_count
    predicates: dict[str, list[bool]] = field(default_factory=dict)
    qa: dict[str, list[str]] = field(default_factory=dict)
    crop_qa: list[CropQA] = field(default_factory=list)
    objects: dict[str, list[list[ScoredBox]]] = field(default_factory=dict)
    chunk_captions: list[ChunkCaption] = field(default_factory=list)
    llm_rules: list[LlmRule] = field(default_factory=list)
    llm_default: str | None = None

    # --- lookups used by the mock backend ---

    def lookup_qa(self, frame: int, question: str, box: Box | None) -> str:
        key = normalize_answer(question)
        if box is not None:
            for entry in self.crop_qa:
                if entry.frame == frame and _box_close(entry.box, box) and key in entry.answers:
                    return entry.answers[key]
        if key in self.predicates:
            return "yes" if self.predicates[key][frame] else "no"
        if key in self.qa:
            return self.qa[key][frame]
        raise MockMiss(self.video_id, frame, question)

    def lookup_boxes(self, frame: int, query: str) -> list[ScoredBox]:
        per_frame = self.objects.get(normalize_answer(query))
        if per_frame is None:
            return []
        return per_frame[frame]

    def lookup_caption(self, frame: int) -> str:
        if self.captions is None:
            raise MockMiss(self.video_id, frame, "caption")
        return self.captions[frame]

    def lookup_chunk_caption(self, start_frame: int, end_frame: int) -> str:
        for c in self.chunk_captions:
            if c.start_frame == start_frame and c.end_frame == end_frame:
                return c.caption
        raise MockMiss(self.video_id, start_frame, f"chunk caption [{start_frame}, {end_frame})")

    # --- (de)serialization ---

    @classmethod
    def from_dict(cls, doc: dict) -> MockWorld:
        for req in ("video_id", "fps", "frame_count"):
            if req not in doc:
                raise WorldFormatError(f"/{req}", "required field missing")
        count = doc["frame_count"]
        if not isinstance(count, int) or count < 1:
            raise WorldFormatError("/frame_count", f"must be a positive integer, got {count!r}")
        world = cls(video_id=doc["video_id"], fps=parse_fps(doc["fps"]), frame_count=count)
        world.transcript = doc.get("transcript")

        captions = doc.get("captions")
        if captions is not None:
            _check_total("/captions", captions, count, str)
            world.captions = list(captions)

        for table_name, want in (("predicates", bool), ("qa", str)):
            table = doc.get(table_name, {})
            for q, values in table.items():
                _check_total(f"/{table_name}/{q}", values, count, want)
                getattr(world, table_name)[normalize_answer(q)] = list(values)

        for name, per_frame in doc.get("objects", {}).items():
            _check_total(f"/objects/{name}", per_frame, count, list)
            rows = []
            for f, boxes in enumerate(per_frame):
                row = []
                for j, b in enumerate(boxes):
                    row.append(_parse_box(f"/objects/{name}/{f}/{j}", b))
                rows.append(row)
            world.objects[normalize_answer(name)] = rows

        for i, entry in enumerate(doc.get("crop_qa", [])):
            ptr = f"/crop_qa/{i}"
            frame = entry.get("frame")
            if not isinstance(frame, int) or not 0 <= frame < count:
                raise WorldFormatError(f"{ptr}/frame", f"frame {frame!r} outside [0, {count})")
            box = _parse_box(ptr, {"box": entry.get("box"), "score": 1.0}).box
            answers = {normalize_answer(q): a for q, a in entry.get("answers", {}).items()}
            world.crop_qa.append(CropQA(frame, box, answers))

        for i, entry in enumerate(doc.get("chunk_captions", [])):
            ptr = f"/chunk_captions/{i}"
            s, e = entry.get("start_frame"), entry.get("end_frame")
            if not (isinstance(s, int) and isinstance(e, int) and 0 <= s <= e <= count):
                raise WorldFormatError(ptr, f"bad chunk bounds [{s!r}, {e!r})")
            world.chunk_captions.append(ChunkCaption(s, e, entry.get("caption", "")))

        llm = doc.get("llm", {})
        for i, rule in enumerate(llm.get("rules", [])):
            if "text" not in rule:
                raise WorldFormatError(f"/llm/rules/{i}", "rule missing 'text'")
            world.llm_rules.append(LlmRule(
                text=rule["text"], contains=rule.get("contains"), sha256=rule.get("sha256")))
        world.llm_default = llm.get("default")
        return world

    def to_dict(self) -> dict:
        doc: dict = {
            "video_id": self.video_id,
            "fps": [self.fps.numerator, self.fps.denominator],
            "frame_count": self.frame_count,
        }
        if self.transcript is not None:
            doc["transcript"] = self.transcript
        if self.captions is not None:
            doc["captions"] = self.captions
        if self.predicates:
            doc["predicates"] = self.predicates
        if self.qa:
            doc["qa"] = self.qa
        if self.objects:
            doc["objects"] = {
                name: [[{"box": list(b.box), "score": b.score} for b in row] for row in rows]
                for name, rows in self.objects.items()
            }
        if self.crop_qa:
            doc["crop_qa"] = [
                {"frame": c.frame, "box": list(c.box), "answers": c.answers} for c in self.crop_qa
            ]
        if self.chunk_captions:
            doc["chunk_captions"] = [
                {"start_frame": c.start_frame, "end_frame": c.end_frame, "caption": c.caption}
                for c in self.chunk_captions
            ]
        if self.llm_rules or self.llm_default is not None:
            rules = []
            for r in self.llm_rules:
                rule: dict = {"text": r.text}
                if r.contains is not None:
                    rule["contains"] = r.contains
                if r.sha256 is not None:
                    rule["sha256"] = r.sha256
                rules.append(rule)
            doc["llm"] = {"rules": rules, "default": self.llm_default}
        return doc


def _check_total(pointer: str, values, count: int, want: type) -> None:
    if not isinstance(values, list):
        raise WorldFormatError(pointer, "expected a per-frame array")
    if len(values) != count:
        missing = min(len(values), count)
        raise WorldFormatError(f"{pointer}/{missing}",
                               f"missing entry for frame {missing} (have {len(values)}, need {count})")
    for i, v in enumerate(values):
        if want is bool and not isinstance(v, bool):
            raise WorldFormatError(f"{pointer}/{i}", f"expected bool, got {type(v).__name__}")
        if want is str and not isinstance(v, str):
            raise WorldFormatError(f"{pointer}/{i}", f"expected string, got {type(v).__name__}")
        if want is list and not isinstance(v, list):
            raise WorldFormatError(f"{pointer}/{i}", f"expected list, got {type(v).__name__}")


def _parse_box(pointer: str, entry) -> ScoredBox:
    try:
        raw = entry["box"]
        box = (float(raw[0]), float(raw[1]), float(raw[2]), float(raw[3]))
        score = float(entry.get("score", 1.0))
    except (KeyError, TypeError, ValueError, IndexError):
        raise WorldFormatError(pointer, "invalid box entry") from None
    if not (box[0] < box[2] and box[1] < box[3]):
        raise WorldFormatError(pointer, "invalid box (need x1 < x2 and y1 < y2)")
    if not 0.0 <= score <= 1.0:
        raise WorldFormatError(pointer, f"score {score} outside [0, 1]")
    return ScoredBox(box, score)


def _box_close(a: Box, b: Box) -> bool:
    return all(abs(x - y) <= _BOX_EPS for x, y in zip(a, b))


def load_mock_world(path: str) -> MockWorld:
    """Load and validate one world file; totality violations name the field."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WorldFormatError("/", f"not valid JSON: {exc}") from None
    return MockWorld.from_dict(doc)


# --- fault injection ---

@dataclass(frozen=True)
class FaultSpec:
    """A seeded corruption of one capability: which capability, what kind of
    corruption, and either a Bernoulli rate per unit or an explicit frame set."""

    capability: Capability
    kind: str                    # wrong_answer | drop_detection | garble
    rate: float | None = None
    frames: frozenset[int] | None = None
    seed: int = 0


_SUPPORTED_KINDS = {
    Capability.IMAGE_QA: {"wrong_answer"},
    Capability.DETECT: {"drop_detection"},
    Capability.CAPTION_IMAGE: {"garble"},
    Capability.CAPTION_VIDEO_CHUNK: {"garble"},
    Capability.TRANSCRIBE: {"garble"},
    Capability.LLM_COMPLETE: {"garble", "wrong_answer"},
}


def inject_fault(world: MockWorld, spec: FaultSpec) -> MockWorld:
    """Return a derived world with deterministic, seeded corruptions; the
    original world is unchanged."""
    if spec.rate is not None and not 0.0 <= spec.rate <= 1.0:
        raise InvalidArgument(f"fault rate {spec.rate} outside [0, 1]")
    if spec.rate is None and spec.frames is None:
        raise InvalidArgument("fault spec needs a rate or a frame set")
    if spec.kind not in _SUPPORTED_KINDS.get(spec.capability, set()):
        raise InvalidArgument(f"corruption {spec.kind!r} not supported for {spec.capability.value}")

    out = copy.deepcopy(world)
    rng = random.Random(spec.seed)

    def hit(unit_index: int) -> bool:
        if spec.frames is not None:
            return unit_index in spec.frames
        return rng.random() < spec.rate  # type: ignore[operator]

    if spec.capability == Capability.IMAGE_QA:
        # unit: frame
        for f in range(out.frame_count):
            if not hit(f):
                continue
            for values in out.predicates.values():
                values[f] = not values[f]
            for values in out.qa.values():
                values[f] = CORRUPTED_TEXT
            for entry in out.crop_qa:
                if entry.frame == f:
                    entry.answers = {q: CORRUPTED_TEXT for q in entry.answers}
    elif spec.capability == Capability.DETECT:
        if spec.frames is not None:
            for rows in out.objects.values():
                for f in spec.frames:
                    if 0 <= f < len(rows):
                        rows[f] = []
        else:
            # unit: individual box, iterated in stable (name, frame, slot) order
            for name in sorted(out.objects):
                rows = out.objects[name]
                for f in range(len(rows)):
                    rows[f] = [b for b in rows[f] if not (rng.random() < spec.rate)]
    elif spec.capability == Capability.CAPTION_IMAGE:
        if out.captions is not None:
            for f in range(out.frame_count):
                if hit(f):
                    out.captions[f] = GARBLED_TEXT
    elif spec.capability == Capability.CAPTION_VIDEO_CHUNK:
        # unit: chunk entry (frame set selects chunks overlapping those frames)
        for i, chunk in enumerate(out.chunk_captions):
            if spec.frames is not None:
                touched = any(chunk.start_frame <= f < chunk.end_frame for f in spec.frames)
            else:
                touched = rng.random() < spec.rate  # type: ignore[operator]
            if touched:
                chunk.caption = GARBLED_TEXT
    elif spec.capability == Capability.TRANSCRIBE:
        # unit: the whole transcript
        if out.transcript is not None and (spec.frames is not None or rng.random() < spec.rate):  # type: ignore[operator]
            out.transcript = GARBLED_TEXT
    elif spec.capability == Capability.LLM_COMPLETE:
        # unit: scripted rule (plus the default)
        replacement = GARBLED_TEXT if spec.kind == "garble" else CORRUPTED_TEXT
        for rule in out.llm_rules:
            if spec.frames is not None or rng.random() < spec.rate:  # type: ignore[operator]
                rule.text = replacement
        if out.llm_default is not None and (spec.frames is not None or rng.random() < spec.rate):  # type: ignore[operator]
            out.llm_default = replacement
    return out


class MockWorldBackend:
    """Serves every capability from a store of mock worlds. Thread-safe:
    worlds are read-only after construction."""

    def __init__(self, worlds: dict[str, MockWorld]):
        self.worlds = dict(worlds)

    def _world(self, video_id: str | None) -> MockWorld:
        if video_id is None or video_id not in self.worlds:
            raise MockMiss(video_id or "<none>", None, "world")
        return self.worlds[video_id]

    def call(self, request: CapabilityRequest) -> dict:
        cap = request.capability
        if cap == Capability.IMAGE_QA:
            world = self._world(request.video_id)
            answer = world.lookup_qa(_frame(request), request.text or "", request.box)
            return {"answer": answer}
        if cap == Capability.DETECT:
            world = self._world(request.video_id)
            boxes = world.lookup_boxes(_frame(request), request.text or "")
            return {"boxes": [
                {"x1": b.box[0], "y1": b.box[1], "x2": b.box[2], "y2": b.box[3], "score": b.score}
                for b in boxes
            ]}
        if cap == Capability.CAPTION_IMAGE:
            world = self._world(request.video_id)
            return {"caption": world.lookup_caption(_frame(request))}
        if cap == Capability.CAPTION_VIDEO_CHUNK:
            world = self._world(request.video_id)
            if request.start_frame is None or request.end_frame is None:
                raise MockMiss(world.video_id, None, "chunk bounds")
            return {"caption": world.lookup_chunk_caption(request.start_frame, request.end_frame)}
        if cap == Capability.TRANSCRIBE:
            world = self._world(request.video_id)
            if world.transcript is None:
                raise MockMiss(world.video_id, None, "transcript")
            return {"text": world.transcript}
        if cap == Capability.LLM_COMPLETE:
            return {"text": self._llm(request)}
        raise MockMiss(request.video_id or "<none>", None, f"capability {cap.value}")

    def _llm(self, request: CapabilityRequest) -> str:
        import hashlib

        prompt = request.text or ""
        sha = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        scopes: list[MockWorld] = []
        if request.video_id is not None and request.video_id in self.worlds:
            scopes.append(self.worlds[request.video_id])
        scopes.extend(w for k, w in sorted(self.worlds.items())
                      if request.video_id is None or k != request.video_id)
        for world in scopes:
            for rule in world.llm_rules:
                if rule.matches(prompt, sha):
                    return rule.text
        for world in scopes:
            if world.llm_default is not None:
                return world.llm_default
        raise MockMiss(request.video_id or "<global>", None, "llm prompt")


def _frame(request: CapabilityRequest) -> int:
    if request.frame is None:
        raise MockMiss(request.video_id or "<none>", None, "frame index")
    return request.frame
