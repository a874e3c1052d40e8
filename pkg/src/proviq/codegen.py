"""Generation prompt assembly and program acquisition.

The prompt is a deterministic concatenation of the API documentation, the
most applicable in-context examples for the question, and the query itself;
its fingerprint keys fixture replay and makes ablation knobs observable.
Fixture mode replays stored programs so full runs need zero live LLM calls.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

from .answers import EmbeddingTable, cosine, embed_phrase
from .errors import BackendUnavailable, ConfigError, GenerationFailure, MalformedResponse, MockMiss, ProgramSyntaxError
from .gateway import Capability, CapabilityRequest, Gateway
from .lang import Program, parse, validate

PROMPT_VERSION = "gen-v1"

# Core surface every prompt carries: the clip value and the vote helper.
_CORE_BLOCK = """\
You can use the following API to answer questions about a video.

get_max_key(counts: dict) -> str
    Return the key with the highest count. Ties go to the key counted first.

class VideoClip:
    num_frames : int
        Number of frames currently in this clip.
    trim(a: int, b: int) -> VideoClip
        Keep positions [a, b) of the current frame list.
"""

# One documentation block per optional method, in a fixed order.
API_METHOD_DOCS: dict[str, str] = {
    "filter_property": (
        "    filter_property(property: str) -> VideoClip\n"
        "        Keep only the frames where the yes/no question about the frame\n"
        "        is answered yes.\n"
    ),
    "filter_object": (
        "    filter_object(object: str) -> VideoClip\n"
        "        Keep only the frames where a detector finds the named object.\n"
    ),
    "find": (
        "    find(object: str) -> VideoClip\n"
        "        Return a clip made of the detector crops of the named object,\n"
        "        ordered by frame. Queries on the result look only inside each crop.\n"
    ),
    "video_query": (
        "    video_query(query: str, possible_answers: list = None) -> dict\n"
        "        Ask the question on every frame and return a dict counting how\n"
        "        often each answer occurred. Combine with get_max_key to vote.\n"
    ),
    "get_caption": (
        "    get_caption(index: int) -> str\n"
        "        Caption of the frame at that position, 0 <= index < num_frames.\n"
    ),
    "get_script": (
        "    get_script() -> str\n"
        "        Transcript of the speech in the whole video, if available.\n"
    ),
    "get_summary": (
        "    get_summary() -> str\n"
        "        A paragraph narrating the whole video. Use for questions about\n"
        "        the overall story of a long video.\n"
    ),
    "track_objects": (
        "    track_objects(crops: VideoClip) -> list\n"
        "        Group detector crops (from find) into per-object tracks over time.\n"
    ),
    "choose_option": (
        "    choose_option(question: str, context: dict, options: list) -> str\n"
        "        Pick the best of the numbered options given labeled context\n"
        "        (captions, scripts, summaries, query results).\n"
    ),
}

API_METHOD_ORDER = list(API_METHOD_DOCS)

_TASK_INSTRUCTIONS = {
    "qa": "Write def answer_question(video, possible_answers): returning a short answer string.",
    "multiple_choice": "Write def answer_question(video, possible_answers): returning the chosen option.",
    "edit": "Write def run(video): returning the clip to keep.",
    "track": "Write def run(video): returning the object tracks.",
}


@dataclass(frozen=True)
class ApiDoc:
    """API documentation with per-method inclusion flags."""

    included: tuple[str, ...] = tuple(API_METHOD_ORDER)

    def __post_init__(self):
        unknown = [m for m in self.included if m not in API_METHOD_DOCS]
        if unknown:
            raise ConfigError(f"unknown API methods: {unknown}")

    def render(self) -> str:
        blocks = [_CORE_BLOCK]
        blocks.extend(API_METHOD_DOCS[m] for m in API_METHOD_ORDER if m in self.included)
        return "\n".join(blocks)


@dataclass(frozen=True)
class PoolExample:
    question: str
    program: str
    task: str
    split: str


class ExamplePool:
    """In-context example programs; every entry must parse and validate, and
    entries tagged as coming from a test split are refused outright."""

    def __init__(self, examples: list[PoolExample]):
        for i, ex in enumerate(examples):
            if ex.split.strip().lower().startswith("test"):
                raise ConfigError(f"pool entry {i} is tagged from a test split ({ex.split!r})")
            try:
                program = parse(ex.program)
            except ProgramSyntaxError as exc:
                raise ConfigError(f"pool entry {i} does not parse: {exc}") from None
            report = validate(program, ex.task)
            if not report.ok:
                raise ConfigError(f"pool entry {i} is invalid: {report.messages()}")
        self.examples = list(examples)

    def __len__(self) -> int:
        return len(self.examples)

    @classmethod
    def load(cls, path: str) -> ExamplePool:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, list):
            raise ConfigError(f"{path}: expected a JSON list of examples")
        entries = []
        for i, e in enumerate(doc):
            try:
                entries.append(PoolExample(e["question"], e["program"], e["task"], e["split"]))
            except (KeyError, TypeError):
                raise ConfigError(f"{path}: entry {i} needs question/program/task/split") from None
        return cls(entries)


def select_examples(question: str, pool: ExamplePool, k: int,
                    table: EmbeddingTable) -> list[PoolExample]:
    """Top-k pool entries by cosine similarity between the question embeddings,
    descending; ties keep pool order. k >= pool size returns the whole pool."""
    if k <= 0:
        return []
    q = embed_phrase(question, table)
    scored = []
    for i, ex in enumerate(pool.examples):
        scored.append((-cosine(q, embed_phrase(ex.question, table)), i))
    scored.sort()
    return [pool.examples[i] for _, i in scored[:k]]


@dataclass(frozen=True)
class PromptBundle:
    api_text: str
    examples: tuple[PoolExample, ...]
    question: str
    options: tuple[str, ...]
    task_kind: str
    text: str = field(init=False, default="")
    fingerprint: str = field(init=False, default="")

    def __post_init__(self):
        object.__setattr__(self, "text", self._render())
        digest = hashlib.sha256(f"{PROMPT_VERSION}\n{self.text}".encode("utf-8")).hexdigest()
        object.__setattr__(self, "fingerprint", digest)

    def _render(self) -> str:
        parts = [self.api_text, ""]
        for ex in self.examples:
            parts.append(f"question: {ex.question}")
            parts.append(ex.program.rstrip("\n"))
            parts.append("")
        parts.append(f"question: {self.question}")
        if self.options:
            parts.append("options:")
            parts.extend(f"{i}. {opt}" for i, opt in enumerate(self.options, start=1))
        parts.append(_TASK_INSTRUCTIONS[self.task_kind])
        return "\n".join(parts) + "\n"


def build_prompt(api: ApiDoc, examples: list[PoolExample], question: str,
                 options: list[str] | None = None, task_kind: str = "qa") -> PromptBundle:
    if task_kind not in _TASK_INSTRUCTIONS:
        raise ConfigError(f"unknown task kind: {task_kind}")
    return PromptBundle(api.render(), tuple(examples), question,
                        tuple(options or ()), task_kind)


_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_+-]*)\n(.*?)```", re.DOTALL)


def strip_code_fences(text: str) -> str:
    m = _FENCE_RE.search(text)
    if m:
        return m.group(1)
    return text


class FixtureStore:
    """Directory of stored programs: <question_id>.py, with <fingerprint>.py
    as a fallback key."""

    def __init__(self, directory: str):
        if not os.path.isdir(directory):
            raise ConfigError(f"fixture directory does not exist: {directory}")
        self.directory = directory

    def get(self, question_id: str | None, fingerprint: str) -> str | None:
        names = []
        if question_id:
            names.append(f"{question_id}.py")
        names.append(f"{fingerprint}.py")
        for name in names:
            path = os.path.join(self.directory, name)
            if os.path.isfile(path):
                with open(path, "r", encoding="utf-8") as fh:
                    return fh.read()
        return None


def _try_parse(source: str, task_kind: str) -> tuple[Program | None, list[str]]:
    try:
        program = parse(source)
    except ProgramSyntaxError as exc:
        return None, [f"syntax error at {exc.line}:{exc.col}: {exc.message}"]
    report = validate(program, task_kind)
    if not report.ok:
        return None, report.messages()
    return program, []


def generate_program(bundle: PromptBundle, mode: str, *,
                     gateway: Gateway | None = None,
                     fixtures: FixtureStore | None = None,
                     question_id: str | None = None,
                     max_tokens: int = 512) -> tuple[str, Program]:
    """Obtain program source (live LLM call or fixture replay), strip code
    fences, parse and validate. Live mode reprompts once with the diagnostics
    appended; anything still invalid raises GenerationFailure.
    """
    if mode == "fixture":
        if fixtures is None:
            raise ConfigError("fixture mode needs a fixture store")
        source = fixtures.get(question_id, bundle.fingerprint)
        if source is None:
            raise GenerationFailure([f"no fixture for question {question_id or bundle.fingerprint}"])
        source = strip_code_fences(source)
        program, diagnostics = _try_parse(source, bundle.task_kind)
        if program is None:
            raise GenerationFailure(diagnostics)
        return source, program

    if mode != "live":
        raise ConfigError(f"unknown generation mode: {mode}")
    if gateway is None:
        raise ConfigError("live mode needs a gateway with an LLM backend")

    def complete(prompt: str) -> str:
        request = CapabilityRequest(Capability.LLM_COMPLETE, text=prompt, max_tokens=max_tokens)
        try:
            return gateway.call(request).text()
        except (BackendUnavailable, MalformedResponse, MockMiss) as exc:
            raise GenerationFailure([f"llm backend failed: {exc}"]) from exc

    source = strip_code_fences(complete(bundle.text))
    program, diagnostics = _try_parse(source, bundle.task_kind)
    if program is not None:
        return source, program
    retry_prompt = (bundle.text + "\nYour previous program was rejected:\n"
                    + "\n".join(diagnostics) + "\nWrite a corrected program.\n")
    source = strip_code_fences(complete(retry_prompt))
    program, retry_diagnostics = _try_parse(source, bundle.task_kind)
    if program is not None:
        return source, program
    raise GenerationFailure(diagnostics + retry_diagnostics)
