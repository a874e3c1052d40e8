"""Shared test helpers: programmatic mock worlds, gateways and toy tables."""

from __future__ import annotations

import numpy as np
import pytest

from proviq.answers import EmbeddingTable
from proviq.clips import SourceVideo, full_clip, sample_uniform
from proviq.gateway import Capability, Gateway, MockWorld, MockWorldBackend
from proviq.primitives import RunContext


def world_doc(video_id="vid", fps=1, frame_count=10, **tables) -> dict:
    doc = {"video_id": video_id, "fps": fps, "frame_count": frame_count}
    doc.update(tables)
    return doc


def make_world(video_id="vid", fps=1, frame_count=10, **tables) -> MockWorld:
    return MockWorld.from_dict(world_doc(video_id, fps, frame_count, **tables))


def make_gateway(*worlds: MockWorld, cache=None, max_concurrency=1,
                 fingerprint="mock") -> Gateway:
    backend = MockWorldBackend({w.video_id: w for w in worlds})
    return Gateway({cap: backend for cap in Capability}, cache=cache,
                   config_fingerprint=fingerprint, max_concurrency=max_concurrency)


def source_for(world: MockWorld) -> SourceVideo:
    return SourceVideo(video_id=world.video_id, fps=world.fps,
                       frame_count=world.frame_count)


def context_for(world: MockWorld, gateway: Gateway | None = None,
                options=None, **kw) -> RunContext:
    return RunContext(gateway=gateway or make_gateway(world),
                      video=source_for(world), options=list(options or []), **kw)


def clip_for(world: MockWorld, n: int | None = None):
    source = source_for(world)
    return full_clip(source) if n is None else sample_uniform(source, n)


def boxes_entry(*coords_scores) -> list[dict]:
    """[(x1,y1,x2,y2,score), ...] -> per-frame JSON box list."""
    return [{"box": list(c[:4]), "score": c[4]} for c in coords_scores]


def toy_table(vectors: dict[str, list[float]]) -> EmbeddingTable:
    dim = len(next(iter(vectors.values())))
    table = EmbeddingTable(dim)
    for token, v in vectors.items():
        table.add(token, np.asarray(v, dtype=float))
    return table


@pytest.fixture
def rng():
    import random
    return random.Random(20240817)


# --- canonical example programs (QA-style, used across test modules) ---

PARTY_PROGRAM = """\
def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    responses = party_segment.video_query("What is the party for?", possible_answers)
    return get_max_key(responses)
"""

# as printed in the original source material: the second statement reads an
# undefined name, which the validator must flag
PARTY_PROGRAM_VERBATIM = """\
def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    responses = vid_segment.video_query("What is the party for?", possible_answers)
    return get_max_key(responses)
"""

SKIER_PROGRAM = """\
def answer_question(video, possible_answers):
    skier_clip = video.filter_object("skier")
    skier_boxes = video.find("skier")
    jacket_boxes = skier_clip.find("jacket")
    responses = jacket_boxes.video_query("What color is this jacket?", possible_answers)
    return get_max_key(responses)
"""

PERSON_PROGRAM = """\
def answer_question(video, possible_answers):
    responses = video.video_query("What is the person doing?", possible_answers)
    return get_max_key(responses)
"""

BEAR_PROGRAM = """\
def answer_question(video, possible_answers):
    vid_seg = video.trim(0, len(video) // 4) # consider the start
    bear_seg = vid_seg.filter_object("bear")
    image_context = bear_seg.get_caption(bear_seg.num_frames // 2)
    activity_context = bear_seg.video_query("What is this?")
    context = {"caption": image_context, "activity": activity_context}
    answer = bear_seg.choose_option("how was the toy bear moved to the front?", context, possible_answers)
    return answer
"""

EXAMPLE_PROGRAMS = {
    "party": PARTY_PROGRAM,
    "skier": SKIER_PROGRAM,
    "person": PERSON_PROGRAM,
    "bear": BEAR_PROGRAM,
}
