#!/usr/bin/env python3
"""Regenerate the shipped mock evaluation suite under assets/mock_suite/.

Authors a set of mock worlds, a 35-question dataset (open-ended and 5-way
multiple choice), fixture programs, a toy embedding table, a typed answer
vocabulary, an in-context example pool and the engine config. Ends by
evaluating the suite and refusing to write a bundle that does not score 100%.

Usage: python scripts/build_mock_suite.py [--out assets/mock_suite]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import shutil
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from proviq.answers import build_vocab  # noqa: E402
from proviq.config import EngineConfig  # noqa: E402
from proviq.engine import Engine  # noqa: E402
from proviq.harness import load_dataset  # noqa: E402
from proviq.lang import parse, validate  # noqa: E402

OPTIONS_5 = {
    "prepared": ["salad", "soup", "cake", "a sandwich", "tea"],
    "goggles": ["to block the sun", "for style", "to see in the snow",
                "they are broken", "no reason"],
    "topic": ["the weather", "a game they won", "homework", "dinner plans", "a movie"],
    "prize": ["a medal", "a trophy", "money", "a car", "nothing"],
    "narrative": ["a cooking tutorial", "a hike to a mountain summit", "a city tour",
                  "a day at the beach", "a chess match"],
}


def box(cx, cy, w, h):
    return [round(cx - w / 2, 4), round(cy - h / 2, 4), round(cx + w / 2, 4), round(cy + h / 2, 4)]


def build_party_world(vid, reason, balloons_color):
    count = 10
    in_party = [2 <= i <= 7 for i in range(count)]
    reasons = []
    for i in range(count):
        if not in_party[i]:
            reasons.append("picnic")
        elif i == 6:
            reasons.append("wedding" if reason != "wedding" else "birthday")
        else:
            reasons.append(reason)
    colors = [balloons_color if i != 0 else "white" for i in range(count)]
    return {
        "video_id": vid, "fps": 2, "frame_count": count,
        "predicates": {"is a party happening?": in_party},
        "qa": {
            "what is the party for?": reasons,
            "what color are the balloons?": colors,
        },
    }


def build_skier_world(vid, jacket_color):
    count = 12
    skier_frames = {1, 4, 5, 9}
    skier_box = box(0.32, 0.5, 0.25, 0.8)
    jacket_box = box(0.32, 0.35, 0.15, 0.3)
    objects = {
        "skier": [[{"box": skier_box, "score": 0.9}] if i in skier_frames else []
                  for i in range(count)],
        "jacket": [[{"box": jacket_box, "score": 0.85}] if i in skier_frames else []
                   for i in range(count)],
    }
    crop_qa = []
    for j, f in enumerate(sorted(skier_frames)):
        answer = "gray" if j == 3 else jacket_color
        crop_qa.append({"frame": f, "box": jacket_box,
                        "answers": {"what color is this jacket?": answer}})
    return {
        "video_id": vid, "fps": 3, "frame_count": count,
        "objects": objects, "crop_qa": crop_qa,
        "qa": {"what is the person doing?": ["skiing"] * count},
        "llm": {"rules": [
            {"contains": "why is the skier wearing goggles?", "text": "3"},
        ]},
    }


def build_kitchen_world(vid, action, utensil, prepared_idx):
    count = 30
    doing = [action if 5 <= i < 25 else "standing" for i in range(count)]
    holding = [10 <= i <= 19 for i in range(count)]
    utensils = [utensil if holding[i] else "none" for i in range(count)]
    stove_on = [5 <= i <= 25 for i in range(count)]
    captions = [f"a person {action} in a kitchen" for _ in range(count)]
    captions[7] = f"a close view of {OPTIONS_5['prepared'][prepared_idx - 1]} being made"
    return {
        "video_id": vid, "fps": 3, "frame_count": count,
        "captions": captions,
        "predicates": {
            "is the person holding a utensil?": holding,
            "is the stove on?": stove_on,
        },
        "qa": {
            "what is the person doing?": doing,
            "what utensil is the person using?": utensils,
        },
        "llm": {"rules": [
            {"contains": "what is being prepared?", "text": str(prepared_idx)},
        ]},
    }


def build_tv_world(vid, prize_idx):
    count = 20
    speakers = ["2" if i not in (0, 1, 10, 11, 12, 13) else "1" for i in range(count)]
    prize = OPTIONS_5["prize"][prize_idx - 1]
    return {
        "video_id": vid, "fps": 4, "frame_count": count,
        "transcript": ("How was your day? Great, we won the game. "
                       f"The whole team gets {prize}."),
        "qa": {"how many people are speaking?": speakers},
        "llm": {"rules": [
            {"contains": "what did they talk about?", "text": "2"},
            {"contains": "what did the team win?", "text": str(prize_idx)},
        ]},
    }


def build_hike_world(vid, narrative_idx, scene):
    count, fps = 40, 2   # 20 seconds -> 20 one-second chunks of 2 frames
    arc = [f"{scene} part {i // 5}" for i in range(20)]
    arc[0] = f"setting out: {scene}"
    arc[19] = f"the end of {scene} at dusk"
    chunk_captions = [{"start_frame": 2 * i, "end_frame": 2 * i + 2, "caption": arc[i]}
                      for i in range(20)]
    paragraph = (f"The video shows {scene} from start to finish, "
                 "ending quietly at dusk.")
    return {
        "video_id": vid, "fps": fps, "frame_count": count,
        "chunk_captions": chunk_captions,
        "llm": {"rules": [
            {"contains": "5-second interval", "text": paragraph},
            {"contains": "which option best describes the overall narrative",
             "text": str(narrative_idx)},
        ]},
    }


def build_dancers_world(vid, n_dancers):
    count = 50
    lanes = [0.25, 0.62, 0.85][:n_dancers]
    rows = []
    for f in range(count):
        frame_boxes = []
        for lane in lanes:
            cx = 0.08 + 0.012 * f
            frame_boxes.append({"box": box(cx, lane, 0.1, 0.14), "score": 0.9})
        rows.append(frame_boxes)
    return {
        "video_id": vid, "fps": 5, "frame_count": count,
        "objects": {"dancer": rows},
    }


# --- fixture programs, one per question style ---

P_PARTY = """\
def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    responses = party_segment.video_query("What is the party for?", possible_answers)
    return get_max_key(responses)
"""

P_PARTY_YESNO = """\
def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    if party_segment.num_frames == 0:
        return "no"
    return "yes"
"""

P_BALLOONS = """\
def answer_question(video, possible_answers):
    responses = video.video_query("What color are the balloons?", possible_answers)
    return get_max_key(responses)
"""

P_SKIER = """\
def answer_question(video, possible_answers):
    skier_clip = video.filter_object("skier")
    jacket_boxes = skier_clip.find("jacket")
    responses = jacket_boxes.video_query("What color is this jacket?", possible_answers)
    return get_max_key(responses)
"""

P_OBJECT_YESNO = """\
def answer_question(video, possible_answers):
    hits = video.filter_object("{object}")
    if hits.num_frames == 0:
        return "no"
    return "yes"
"""

P_GOGGLES = """\
def answer_question(video, possible_answers):
    activity = video.video_query("What is the person doing?")
    context = {"activity": activity}
    answer = video.choose_option("why is the skier wearing goggles?", context, possible_answers)
    return answer
"""

P_DOING = """\
def answer_question(video, possible_answers):
    responses = video.video_query("What is the person doing?", possible_answers)
    return get_max_key(responses)
"""

P_UTENSIL = """\
def answer_question(video, possible_answers):
    holding = video.filter_property("Is the person holding a utensil?")
    responses = holding.video_query("What utensil is the person using?", possible_answers)
    return get_max_key(responses)
"""

P_PREPARED = """\
def answer_question(video, possible_answers):
    vid_seg = video.trim(0, len(video) // 2)
    image_context = vid_seg.get_caption(vid_seg.num_frames // 2)
    activity_context = vid_seg.video_query("What is the person doing?")
    context = {"caption": image_context, "activity": activity_context}
    answer = vid_seg.choose_option("what is being prepared?", context, possible_answers)
    return answer
"""

P_STOVE = """\
def answer_question(video, possible_answers):
    on_frames = video.filter_property("Is the stove on?")
    if on_frames.num_frames > 0:
        return "yes"
    else:
        return "no"
"""

P_SCRIPT = """\
def answer_question(video, possible_answers):
    script = video.get_script()
    context = {"script": script}
    answer = video.choose_option("{question}", context, possible_answers)
    return answer
"""

P_SPEAKERS = """\
def answer_question(video, possible_answers):
    responses = video.video_query("How many people are speaking?", possible_answers)
    return get_max_key(responses)
"""

P_NARRATIVE = """\
def answer_question(video, possible_answers):
    summary = video.get_summary()
    context = {"summary": summary}
    answer = video.choose_option("which option best describes the overall narrative of the video?", context, possible_answers)
    return answer
"""

P_COUNT_TRACKS = """\
def answer_question(video, possible_answers):
    crops = video.find("dancer")
    tracks = video.track_objects(crops)
    return len(tracks)
"""

P_MULTI_DANCERS = """\
def answer_question(video, possible_answers):
    crops = video.find("dancer")
    tracks = video.track_objects(crops)
    if len(tracks) > 1:
        return "yes"
    return "no"
"""


def build_suite(out_dir: str) -> None:
    worlds = {}
    records: list[dict] = []
    fixtures: dict[str, str] = {}

    def add_record(qid, vid, question, qtype, answers, options=None, program=""):
        record = {"question_id": qid, "video_id": vid, "question": question,
                  "type": qtype, "answers": answers}
        if options:
            record["options"] = options
        records.append(record)
        fixtures[qid] = program

    # party worlds ------------------------------------------------------
    for i, (reason, color) in enumerate(
            [("birthday", "red"), ("wedding", "blue"), ("graduation", "green")], start=1):
        vid = f"party{i:02d}"
        worlds[vid] = build_party_world(vid, reason, color)
        add_record(f"{vid}_q1", vid, "what is the party for?", "reason",
                   [reason], program=P_PARTY)
        if i < 3:
            add_record(f"{vid}_q2", vid, "is a party happening in the video?", "yesno",
                       ["yes"], program=P_PARTY_YESNO)
        else:
            add_record(f"{vid}_q2", vid, "is a skier visible in the video?", "yesno",
                       ["no"], program=P_OBJECT_YESNO.replace("{object}", "skier"))
        add_record(f"{vid}_q3", vid, "what color are the balloons?", "color",
                   [color], program=P_BALLOONS)

    # skier worlds ------------------------------------------------------
    for i, jacket in enumerate(["black", "red"], start=1):
        vid = f"skier{i:02d}"
        worlds[vid] = build_skier_world(vid, jacket)
        add_record(f"{vid}_q1", vid, "what color is the skier's jacket?", "color",
                   [jacket], program=P_SKIER)
        add_record(f"{vid}_q2", vid, "is there a skier in the video?", "yesno",
                   ["yes"], program=P_OBJECT_YESNO.replace("{object}", "skier"))
        add_record(f"{vid}_q3", vid, "why is the skier wearing goggles?", "cause",
                   [OPTIONS_5["goggles"][2]], options=OPTIONS_5["goggles"],
                   program=P_GOGGLES)

    # kitchen worlds ----------------------------------------------------
    for i, (action, utensil, prepared_idx) in enumerate(
            [("cooking", "spoon", 2), ("baking", "whisk", 3)], start=1):
        vid = f"kitchen{i:02d}"
        worlds[vid] = build_kitchen_world(vid, action, utensil, prepared_idx)
        add_record(f"{vid}_q1", vid, "what is the person doing?", "action",
                   [action], program=P_DOING)
        add_record(f"{vid}_q2", vid, "what utensil is the person using?", "object",
                   [utensil], program=P_UTENSIL)
        add_record(f"{vid}_q3", vid, "what is being prepared?", "object",
                   [OPTIONS_5["prepared"][prepared_idx - 1]], options=OPTIONS_5["prepared"],
                   program=P_PREPARED)
        add_record(f"{vid}_q4", vid, "is the stove on?", "yesno",
                   ["yes"], program=P_STOVE)

    # tv worlds ---------------------------------------------------------
    for i, prize_idx in enumerate([2, 3], start=1):
        vid = f"tv{i:02d}"
        worlds[vid] = build_tv_world(vid, prize_idx)
        add_record(f"{vid}_q1", vid, "what did they talk about?", "narrative",
                   [OPTIONS_5["topic"][1]], options=OPTIONS_5["topic"],
                   program=P_SCRIPT.replace("{question}", "what did they talk about?"))
        add_record(f"{vid}_q2", vid, "how many people are speaking?", "number",
                   ["2"], program=P_SPEAKERS)
        add_record(f"{vid}_q3", vid, "what did the team win?", "object",
                   [OPTIONS_5["prize"][prize_idx - 1]], options=OPTIONS_5["prize"],
                   program=P_SCRIPT.replace("{question}", "what did the team win?"))

    # hike worlds -------------------------------------------------------
    for i, (narrative_idx, scene) in enumerate(
            [(2, "a hike up a mountain trail"), (4, "a day at the beach")], start=1):
        vid = f"hike{i:02d}"
        worlds[vid] = build_hike_world(vid, narrative_idx, scene)
        add_record(f"{vid}_q1", vid,
                   "which option best describes the overall narrative of the video?",
                   "narrative", [OPTIONS_5["narrative"][narrative_idx - 1]],
                   options=OPTIONS_5["narrative"], program=P_NARRATIVE)

    # dancer worlds -----------------------------------------------------
    for i, n in enumerate([2, 3], start=1):
        vid = f"dancers{i:02d}"
        worlds[vid] = build_dancers_world(vid, n)
        add_record(f"{vid}_q1", vid, "how many dancers appear in the video?", "number",
                   [str(n)], program=P_COUNT_TRACKS)
        add_record(f"{vid}_q2", vid, "are there multiple dancers?", "yesno",
                   ["yes"], program=P_MULTI_DANCERS)

    # sanity: every fixture parses and validates for its task
    for record in records:
        task = "multiple_choice" if record.get("options") else "qa"
        report = validate(parse(fixtures[record["question_id"]]), task)
        assert report.ok, (record["question_id"], report.messages())

    # vocabulary --------------------------------------------------------
    typed_answers = [
        ("birthday", "reason"), ("wedding", "reason"), ("graduation", "reason"),
        ("picnic", "reason"),
        ("yes", "yesno"), ("no", "yesno"),
        ("black", "color"), ("red", "color"), ("blue", "color"), ("green", "color"),
        ("gray", "color"), ("white", "color"),
        ("cooking", "action"), ("baking", "action"), ("skiing", "action"),
        ("dancing", "action"), ("standing", "action"),
        ("spoon", "object"), ("whisk", "object"), ("knife", "object"), ("bowl", "object"),
        ("1", "number"), ("2", "number"), ("3", "number"), ("4", "number"), ("5", "number"),
    ]
    training = []
    for rank, (answer, qtype) in enumerate(typed_answers):
        training.extend([(answer, qtype)] * (len(typed_answers) - rank + 1))
    vocab = build_vocab(training, k=len(typed_answers), mode="type_based")

    # toy embedding table ----------------------------------------------
    rng = random.Random(17)
    tokens: set[str] = set()
    for answer, _ in typed_answers:
        tokens.update(answer.split())
    for record in records:
        tokens.update(w.strip("?'.s") for w in record["question"].lower().split())
    tokens.update({"video", "person", "doing", "happening", "visible", "appear"})
    tokens = {t for t in tokens if t}
    dim = 16
    vec_lines = [f"{len(tokens)} {dim}"]
    for token in sorted(tokens):
        values = [f"{rng.uniform(-1, 1):.6f}" for _ in range(dim)]
        vec_lines.append(token + " " + " ".join(values))

    # in-context example pool -------------------------------------------
    pool = [
        {"question": "what is the celebration about?", "program": P_PARTY,
         "task": "qa", "split": "train"},
        {"question": "what color is the skier's jacket?", "program": P_SKIER,
         "task": "qa", "split": "train"},
        {"question": "what is the person doing?", "program": P_DOING,
         "task": "qa", "split": "train"},
        {"question": "is anyone visible in the video?",
         "program": P_OBJECT_YESNO.replace("{object}", "person"),
         "task": "qa", "split": "train"},
        {"question": "what is being prepared?", "program": P_PREPARED,
         "task": "qa", "split": "train"},
        {"question": "how many dogs appear in the video?",
         "program": P_COUNT_TRACKS.replace("dancer", "dog"),
         "task": "qa", "split": "train"},
    ]

    config = {
        "mock_world": "worlds",
        "fixtures_dir": "fixtures",
        "example_pool": "pool.json",
        "embedding_table": "vectors.txt",
        "vocab_file": "vocab.json",
        "vocab_mode": "type_based",
        "generation_mode": "fixture",
        "sample_frames": 60,
        "max_concurrency": 1,
        "workers": 1,
        "seed": 0,
    }

    # --- write everything ---
    if os.path.exists(out_dir):
        shutil.rmtree(out_dir)
    os.makedirs(os.path.join(out_dir, "worlds"))
    os.makedirs(os.path.join(out_dir, "fixtures"))
    for vid, doc in sorted(worlds.items()):
        with open(os.path.join(out_dir, "worlds", f"{vid}.json"), "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    with open(os.path.join(out_dir, "dataset.jsonl"), "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    for qid, program in sorted(fixtures.items()):
        with open(os.path.join(out_dir, "fixtures", f"{qid}.py"), "w") as fh:
            fh.write(program)
    vocab.save(os.path.join(out_dir, "vocab.json"))
    with open(os.path.join(out_dir, "vectors.txt"), "w") as fh:
        fh.write("\n".join(vec_lines) + "\n")
    with open(os.path.join(out_dir, "pool.json"), "w") as fh:
        json.dump(pool, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(config, fh, indent=1, sort_keys=True)
        fh.write("\n")

    # --- prove the bundle scores 100% before accepting it ---
    engine = Engine(EngineConfig.load(os.path.join(out_dir, "config.json")))
    report, results = engine.evaluate(load_dataset(os.path.join(out_dir, "dataset.jsonl")))
    for r in results:
        if r.outcome != "correct":
            print(f"FAIL {r.record.question_id}: {r.outcome} "
                  f"raw={r.raw_answer!r} matched={r.matched_answer!r} err={r.error}")
    assert report.accuracy == 1.0, f"suite accuracy {report.accuracy:.3f}, want 1.0"
    print(f"suite ok: {report.total} questions, accuracy {report.accuracy:.3f}, "
          f"{len(worlds)} worlds -> {out_dir}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__),
                                                  "..", "assets", "mock_suite"))
    args = ap.parse_args()
    build_suite(os.path.abspath(args.out))
