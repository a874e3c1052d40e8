import copy

import pytest

from proviq.interp import ExecBudget, TraceEntry, execute, get_max_key
from proviq.errors import InvalidArgument, ModuleError
from proviq.lang import parse, validate

from .conftest import (
    BEAR_PROGRAM, PARTY_PROGRAM, boxes_entry, clip_for, context_for, make_gateway, make_world,
)


def run(source, world, options=None, budget=None, task="qa", n=None, gateway=None):
    program = parse(source)
    report = validate(program, task)
    assert report.ok, report.messages()
    ctx = context_for(world, gateway=gateway, options=options)
    return execute(program, clip_for(world, n), ctx, budget)


class TestBasics:
    def test_minimal_return(self):
        world = make_world(frame_count=1)
        value, trace = run("def answer_question(video, possible_answers):\n    return 1\n", world)
        assert value == 1
        assert trace.ok
        assert len(trace.entries) == 1
        assert trace.entries[0].op == "return"

    def test_party_program_majority(self):
        # predicate true on 5 frames; it answers birthday on 4 of them
        truth = [False, True, True, True, True, True, False, False]
        answers = ["x", "birthday", "birthday", "wedding", "birthday", "birthday", "x", "x"]
        world = make_world(frame_count=8,
                           predicates={"is a party happening?": truth},
                           qa={"what is the party for?": answers})
        value, trace = run(PARTY_PROGRAM, world, options=[])
        # oracle by hand: frames 1..5 -> birthday x4, wedding x1
        assert value == "birthday"
        assert trace.ok
        caps = trace.capabilities_used()
        assert caps == {"image_qa"}

    def test_bear_program_end_to_end(self):
        world = make_world(
            frame_count=16,
            captions=[f"scene {i}" for i in range(16)],
            objects={"bear": [boxes_entry((0.2, 0.2, 0.6, 0.6, 0.9)) if i < 3 else []
                              for i in range(16)]},
            qa={"what is this?": ["a toy bear"] * 16},
            llm={"rules": [{"contains": "how was the toy bear moved", "text": "2"}]},
        )
        value, trace = run(BEAR_PROGRAM, world, options=["by hand", "by a rope", "rolled"])
        assert value.index == 2
        assert trace.ok

    def test_if_branches(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    people = video.filter_property(\"is anyone visible?\")\n"
                  "    if people.num_frames == 0:\n"
                  "        return \"no\"\n"
                  "    return \"yes\"\n")
        world_yes = make_world(frame_count=4, predicates={"is anyone visible?": [True] * 4})
        world_no = make_world(frame_count=4, predicates={"is anyone visible?": [False] * 4})
        assert run(source, world_yes)[0] == "yes"
        assert run(source, world_no)[0] == "no"

    def test_arithmetic_and_len(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    half = video.trim(0, len(video) // 2)\n"
                  "    return half.num_frames * 10 + 3 - 1\n")
        world = make_world(frame_count=9)
        value, trace = run(source, world)
        assert value == 42  # 4 frames * 10 + 3 - 1


class TestGetMaxKey:
    def test_unique_maximum(self):
        assert get_max_key({"yes": 3, "no": 1}) == "yes"

    def test_tie_breaks_to_first_inserted(self):
        assert get_max_key({"red": 2, "blue": 2}) == "red"

    def test_empty_map(self):
        with pytest.raises(ModuleError) as err:
            get_max_key({})
        assert err.value.code == "EmptyCounter"

    def test_in_language(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    counts = {\"red\": 2, \"blue\": 2}\n"
                  "    return get_max_key(counts)\n")
        world = make_world(frame_count=1)
        assert run(source, world)[0] == "red"


class TestFailures:
    def test_module_error_carried_in_trace(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    counts = video.video_query(\"what?\")\n"
                  "    return get_max_key(counts)\n")
        world = make_world(frame_count=2)  # no qa table -> mock miss
        value, trace = run(source, world)
        assert value is None
        assert trace.error is not None
        assert trace.error["kind"] == "module"
        assert trace.error["statement"] == 0

    def test_trim_error_surfaces_as_module_failure(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    seg = video.trim(0, 99)\n"
                  "    return 1\n")
        world = make_world(frame_count=5)
        value, trace = run(source, world)
        assert value is None
        assert trace.error["kind"] == "module"
        assert trace.error["code"] == "InvalidArgument"

    def test_type_error(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    x = video.trim(\"a\", 2)\n"
                  "    return 1\n")
        world = make_world(frame_count=5)
        value, trace = run(source, world)
        assert value is None
        assert trace.error["kind"] == "type"

    def test_statement_budget(self):
        lines = ["def answer_question(video, possible_answers):"]
        lines += [f"    x{i} = {i}" for i in range(30)]
        lines.append("    return 1")
        world = make_world(frame_count=1)
        value, trace = run("\n".join(lines) + "\n", world,
                           budget=ExecBudget(max_statements=10))
        assert value is None
        assert trace.error == {"kind": "budget", "which": "statements",
                               "message": trace.error["message"], "statement": 9}
        assert len(trace.entries) == 10

    def test_backend_call_budget(self):
        truth = [True] * 20
        world = make_world(frame_count=20, predicates={"p?": truth})
        source = ("def answer_question(video, possible_answers):\n"
                  "    a = video.filter_property(\"p?\")\n"
                  "    return a.num_frames\n")
        value, trace = run(source, world, budget=ExecBudget(max_backend_calls=19))
        assert value is None
        assert trace.error["kind"] == "budget"
        assert trace.error["which"] == "backend_calls"
        # one more call than the budget was made before the abort
        assert sum(e.backend_calls for e in trace.entries) == 20

    def test_wall_clock_budget(self):
        world = make_world(frame_count=1)
        with pytest.raises(InvalidArgument):
            ExecBudget(wall_clock_limit_s=0)


class TestDeterminismAndIsolation:
    def test_identical_runs(self):
        truth = [i % 2 == 0 for i in range(12)]
        world = make_world(frame_count=12, predicates={"p?": truth},
                           qa={"what?": [f"w{i % 3}" for i in range(12)]})
        source = ("def answer_question(video, possible_answers):\n"
                  "    seg = video.filter_property(\"p?\")\n"
                  "    counts = seg.video_query(\"what?\")\n"
                  "    return get_max_key(counts)\n")
        v1, t1 = run(source, world)
        v2, t2 = run(source, world)
        assert v1 == v2
        assert t1.to_json_dicts() == t2.to_json_dicts()

    def test_budget_increase_never_changes_success(self):
        world = make_world(frame_count=6, qa={"what?": ["a"] * 6})
        source = ("def answer_question(video, possible_answers):\n"
                  "    counts = video.video_query(\"what?\")\n"
                  "    return get_max_key(counts)\n")
        v1, _ = run(source, world, budget=ExecBudget())
        v2, _ = run(source, world,
                    budget=ExecBudget(max_statements=10**6, max_backend_calls=10**6,
                                      wall_clock_limit_s=10**6))
        assert v1 == v2

    def test_no_side_effects_on_inputs(self):
        world = make_world(frame_count=6, predicates={"p?": [True] * 6})
        ctx = context_for(world)
        clip = clip_for(world)
        frames_before = clip.frames
        program = parse("def answer_question(video, possible_answers):\n"
                        "    x = video.filter_property(\"p?\")\n"
                        "    return x.num_frames\n")
        execute(program, clip, ctx)
        assert clip.frames == frames_before
        assert clip.indices() == list(range(6))

    def test_trace_completeness_against_call_log(self):
        world = make_world(frame_count=5, predicates={"p?": [True] * 5},
                           qa={"what?": ["x"] * 5},
                           captions=[f"c{i}" for i in range(5)])
        gateway = make_gateway(world)
        source = ("def answer_question(video, possible_answers):\n"
                  "    a = video.filter_property(\"p?\")\n"
                  "    counts = a.video_query(\"what?\")\n"
                  "    cap = video.get_caption(0)\n"
                  "    return get_max_key(counts)\n")
        value, trace = run(source, world, gateway=gateway)
        assert trace.ok
        spans = [e.log_span for e in trace.entries]
        # spans are contiguous, non-overlapping, and cover the whole call log
        assert spans[0][0] == 0
        for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
            assert b1 == a2
        assert spans[-1][1] == gateway.log_length()
        assert sum(b - a for a, b in spans) == gateway.log_length()

    def test_options_are_available_to_programs(self):
        source = ("def answer_question(video, possible_answers):\n"
                  "    return possible_answers[1]\n")
        world = make_world(frame_count=1)
        value, _ = run(source, world, options=["a", "b", "c"])
        assert value == "b"


class TestTraceSerialization:
    def test_durations_excluded_from_json(self):
        entry = TraceEntry(index=0, op="return", args="return 1", duration_s=1.23,
                           requests=2, backend_calls=2, capabilities={"image_qa": 2})
        doc = entry.to_json_dict()
        assert "duration" not in str(doc)
        assert doc["capabilities"] == {"image_qa": 2}
