"""Benchmark records, outcome classification and report aggregation.

Every evaluated question gets exactly one outcome:
  correct               matched answer hits the ground truth
  generation_failure    no valid program was obtained (no trace exists)
  module_failure        the program aborted while running (trace has the error)
  postprocess_mismatch  the raw program output was right but answer matching
                        mapped it off the ground truth
  wrong_answer          everything ran; the answer is simply wrong (the bucket
                        a human audits for label errors)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .interp import ExecTrace, get_max_key
from .primitives import OptionChoice
from .textnorm import normalize_answer, phrase_key

OUTCOMES = ("correct", "generation_failure", "module_failure",
            "postprocess_mismatch", "wrong_answer")


@dataclass(frozen=True)
class BenchmarkRecord:
    question_id: str
    video_id: str
    question: str
    question_type: str | None = None
    options: tuple[str, ...] | None = None   # present iff multiple choice
    answers: tuple[str, ...] = ()

    @property
    def task_kind(self) -> str:
        return "multiple_choice" if self.options else "qa"


def load_dataset(path: str) -> list[BenchmarkRecord]:
    """One JSON record per line: {question_id, video_id, question, type?,
    options?, answers}. Parse errors abort with the offending line number."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                record = BenchmarkRecord(
                    question_id=str(doc["question_id"]),
                    video_id=str(doc["video_id"]),
                    question=str(doc["question"]),
                    question_type=doc.get("type"),
                    options=tuple(doc["options"]) if doc.get("options") else None,
                    answers=tuple(str(a) for a in doc["answers"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad dataset record ({exc})") from None
            records.append(record)
    return records


@dataclass
class EvalOutcome:
    """One question's full evaluation result."""

    record: BenchmarkRecord
    outcome: str
    prompt_fingerprint: str | None = None
    program: str | None = None
    trace: ExecTrace | None = None
    raw_answer: str | None = None
    matched_answer: str | None = None
    option_index: int | None = None
    error: dict | None = None
    requests: int = 0     # total capability requests made for this record

    def to_json_dict(self) -> dict:
        return {
            "question_id": self.record.question_id,
            "video_id": self.record.video_id,
            "question": self.record.question,
            "type": self.record.question_type,
            "outcome": self.outcome,
            "prompt_fingerprint": self.prompt_fingerprint,
            "program": self.program,
            "raw_answer": self.raw_answer,
            "matched_answer": self.matched_answer,
            "option_index": self.option_index,
            "error": self.error,
            "requests": self.requests,
            "trace": self.trace.to_json_dicts() if self.trace is not None else None,
        }


@dataclass
class EvalReport:
    total: int
    counts: dict[str, int]
    accuracy: float
    by_type: dict[str, dict] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": {k: self.counts.get(k, 0) for k in OUTCOMES},
            "accuracy": self.accuracy,
            "by_type": {t: self.by_type[t] for t in sorted(self.by_type)},
        }


def build_report(results: list[EvalOutcome]) -> EvalReport:
    counts = {k: 0 for k in OUTCOMES}
    for r in results:
        counts[r.outcome] += 1
    total = len(results)
    accuracy = counts["correct"] / total if total else 0.0
    by_type: dict[str, dict] = {}
    for r in results:
        if r.record.question_type is None:
            continue
        slot = by_type.setdefault(r.record.question_type, {"total": 0, "correct": 0})
        slot["total"] += 1
        slot["correct"] += int(r.outcome == "correct")
    for slot in by_type.values():
        slot["accuracy"] = slot["correct"] / slot["total"]
    return EvalReport(total=total, counts=counts, accuracy=accuracy, by_type=by_type)


# --- answer handling ---

def value_to_text(value) -> str:
    """Normalize a program's return value to an answer string."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, dict):
        return get_max_key(value) if value else ""
    if isinstance(value, OptionChoice):
        return str(value.index)
    if isinstance(value, list):
        return str(len(value))
    return str(value)


def truth_option_indices(record: BenchmarkRecord) -> set[int]:
    """Ground-truth option indices (1-based) of a multiple-choice record.
    Answers may be given as option text or as the index itself."""
    assert record.options is not None
    indices = set()
    option_keys = {phrase_key(opt): i + 1 for i, opt in enumerate(record.options)}
    for answer in record.answers:
        stripped = answer.strip()
        if stripped.isdigit() and 1 <= int(stripped) <= len(record.options):
            indices.add(int(stripped))
        key = phrase_key(answer)
        if key in option_keys:
            indices.add(option_keys[key])
    if not indices:
        raise ConfigError(
            f"record {record.question_id}: no ground-truth answer maps to an option")
    return indices


def chosen_option_index(value, options: tuple[str, ...]) -> int | None:
    """Map a program result onto a 1-based option index, if possible."""
    if isinstance(value, OptionChoice):
        return value.index
    if isinstance(value, bool):
        value = "yes" if value else "no"
    if isinstance(value, int):
        return value if 1 <= value <= len(options) else None
    if isinstance(value, dict):
        value = get_max_key(value) if value else ""
    if isinstance(value, str):
        stripped = value.strip()
        if stripped.isdigit() and 1 <= int(stripped) <= len(options):
            return int(stripped)
        key = phrase_key(value)
        for i, opt in enumerate(options, start=1):
            if phrase_key(opt) == key:
                return i
    return None


def truth_answer_keys(record: BenchmarkRecord) -> set[str]:
    return {phrase_key(a) for a in record.answers}


# --- predicate-based editing ---

@dataclass(frozen=True)
class EditSegment:
    start_frame: int
    end_frame: int        # half-open
    start_s: float
    end_s: float


def segments_from_kept(kept_indices: list[int], fps) -> list[EditSegment]:
    """Merge kept frame indices into maximal contiguous half-open segments."""
    segments = []
    run_start = None
    prev = None
    for idx in kept_indices:
        if run_start is None:
            run_start = idx
        elif idx != prev + 1:
            segments.append(_segment(run_start, prev + 1, fps))
            run_start = idx
        prev = idx
    if run_start is not None:
        segments.append(_segment(run_start, prev + 1, fps))
    return segments


def _segment(start: int, end: int, fps) -> EditSegment:
    return EditSegment(start, end, float(start / fps), float(end / fps))
