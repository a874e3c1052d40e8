"""The orchestration engine: builds prompts, obtains programs, executes them
against a video and a backend gateway, post-processes answers, and runs the
evaluation / editing / tracking / summarization entry points.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import harness
from .answers import AnswerMatcher, EmbeddingTable, Vocabulary
from .clips import SourceVideo, VideoClip, full_clip, sample_uniform
from .codegen import ApiDoc, ExamplePool, FixtureStore, PromptBundle, build_prompt, generate_program, select_examples
from .config import EngineConfig
from .errors import ConfigError, GenerationFailure, ModuleError
from .gateway import (
    Capability, CapabilityRequest, Gateway, MockWorldBackend, RemoteBackend, ResponseCache,
)
from .harness import BenchmarkRecord, EvalOutcome, EvalReport, build_report
from .interp import ExecBudget, execute
from .primitives import RunContext, filter_property
from .summarize import caption_chunks, chunk, summarize_captions
from .textnorm import normalize_answer, phrase_key
from .tracking import Detection, Track, TrackerParams, export_jsonl, track_objects
from .videos import VideoStore, load_worlds


@dataclass
class QueryResult:
    outcome: str                 # answered | generation_failure | module_failure
    answer: str | None = None
    raw_answer: str | None = None
    option_index: int | None = None
    program: str | None = None
    prompt_fingerprint: str | None = None
    prompt: str | None = None
    trace: list[dict] | None = None
    error: dict | None = None


@dataclass
class EditResult:
    video_id: str
    predicate: str
    mode: str
    segments: list[dict]
    kept_frames: list[int]
    manifest: list[dict]


@dataclass
class TrackResult:
    video_id: str
    query: str
    tracks: list[dict] = field(default_factory=list)   # per-track summaries
    export_lines: list[str] = field(default_factory=list)


@dataclass
class SummarizeResult:
    video_id: str
    chunks: list[dict]
    paragraph: str
    prompt_fingerprint: str


class Engine:
    def __init__(self, config: EngineConfig):
        self.config = config
        self.worlds = load_worlds(config.mock_world) if config.mock_world else {}
        self.videos = VideoStore(self.worlds, config.frames_dir)
        self.gateway = self._build_gateway()
        self.budget = ExecBudget(**config.budget.model_dump())
        self.tracker_params = TrackerParams(**config.tracker.model_dump())

        self.table = EmbeddingTable.load(config.embedding_table) if config.embedding_table else None
        vocab = Vocabulary.load(config.vocab_file) if config.vocab_file else None
        self.matcher = AnswerMatcher(self.table, vocab) if (self.table and vocab) else None
        self.pool = ExamplePool.load(config.example_pool) if config.example_pool else ExamplePool([])
        self.fixtures = FixtureStore(config.fixtures_dir) if config.fixtures_dir else None
        self.apidoc = ApiDoc(tuple(config.api_methods)) if config.api_methods is not None else ApiDoc()

    def _build_gateway(self) -> Gateway:
        config = self.config
        if config.backend.endpoint:
            backend = RemoteBackend(config.backend.endpoint, config.backend.token,
                                    config.backend.timeout_s)
            fingerprint = f"remote:{config.backend.endpoint}"
        else:
            if not self.worlds:
                raise ConfigError("no backend endpoint and no mock worlds configured")
            backend = MockWorldBackend(self.worlds)
            fingerprint = "mock"
        backends = {cap: backend for cap in Capability}
        cache = ResponseCache(config.cache_path) if config.cache_path else None
        return Gateway(backends, cache=cache, config_fingerprint=fingerprint,
                       max_concurrency=config.max_concurrency)

    # --- shared plumbing ---

    def _context(self, source: SourceVideo, options: list[str] | None) -> RunContext:
        return RunContext(
            gateway=self.gateway, video=source, options=list(options or []),
            detect_threshold=self.config.detect_threshold,
            chunk_seconds=self.config.chunk_seconds,
            llm_max_tokens=self.config.llm_max_tokens,
            tracker_params=self.tracker_params,
        )

    def build_bundle(self, question: str, options: list[str] | None,
                     task_kind: str) -> PromptBundle:
        if self.table is not None and len(self.pool):
            examples = select_examples(question, self.pool, self.config.num_examples, self.table)
        else:
            examples = self.pool.examples[: self.config.num_examples]
        return build_prompt(self.apidoc, examples, question, options, task_kind)

    def obtain_program(self, bundle: PromptBundle, question_id: str | None):
        return generate_program(
            bundle, self.config.generation_mode, gateway=self.gateway,
            fixtures=self.fixtures, question_id=question_id,
            max_tokens=self.config.llm_max_tokens,
        )

    # --- question answering ---

    def answer_record(self, record: BenchmarkRecord) -> EvalOutcome:
        bundle = self.build_bundle(record.question, list(record.options or ()), record.task_kind)
        try:
            source_text, program = self.obtain_program(bundle, record.question_id)
        except GenerationFailure as exc:
            return EvalOutcome(record=record, outcome="generation_failure",
                               prompt_fingerprint=bundle.fingerprint,
                               error={"kind": "generation", "diagnostics": exc.diagnostics})

        source = self.videos.source(record.video_id)
        clip = sample_uniform(source, self.config.sample_frames)
        ctx = self._context(source, list(record.options or ()))
        value, trace = execute(program, clip, ctx, self.budget)
        requests = sum(e.requests for e in trace.entries)
        out = EvalOutcome(record=record, outcome="wrong_answer",
                          prompt_fingerprint=bundle.fingerprint, program=source_text,
                          trace=trace, requests=requests)
        if trace.error is not None:
            out.outcome = "module_failure"
            out.error = trace.error
            return out

        if record.options:
            idx = harness.chosen_option_index(value, record.options)
            out.option_index = idx
            if idx is None:
                out.raw_answer = harness.value_to_text(value)
                out.outcome = "wrong_answer"
                return out
            out.matched_answer = record.options[idx - 1]
            out.raw_answer = harness.value_to_text(value)
            truth = harness.truth_option_indices(record)
            out.outcome = "correct" if idx in truth else "wrong_answer"
            return out

        raw = harness.value_to_text(value)
        out.raw_answer = raw
        if self.matcher is not None:
            result = self.matcher.match(raw, self.config.vocab_mode, record.question_type)
            out.matched_answer = result.answer
        else:
            out.matched_answer = normalize_answer(raw)
        truth = harness.truth_answer_keys(record)
        if phrase_key(out.matched_answer) in truth:
            out.outcome = "correct"
        elif phrase_key(raw) in truth:
            out.outcome = "postprocess_mismatch"
        else:
            out.outcome = "wrong_answer"
        return out

    def evaluate(self, records: list[BenchmarkRecord]) -> tuple[EvalReport, list[EvalOutcome]]:
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(self.answer_record, records))
        else:
            results = [self.answer_record(r) for r in records]
        return build_report(results), results

    def query(self, video_id: str, question: str, options: list[str] | None = None,
              question_id: str | None = None, dry_run: bool = False) -> QueryResult:
        task_kind = "multiple_choice" if options else "qa"
        bundle = self.build_bundle(question, options, task_kind)
        result = QueryResult(outcome="answered", prompt_fingerprint=bundle.fingerprint,
                             prompt=bundle.text)
        try:
            source_text, program = self.obtain_program(bundle, question_id)
        except GenerationFailure as exc:
            result.outcome = "generation_failure"
            result.error = {"kind": "generation", "diagnostics": exc.diagnostics}
            return result
        result.program = source_text
        if dry_run:
            return result

        source = self.videos.source(video_id)
        clip = sample_uniform(source, self.config.sample_frames)
        ctx = self._context(source, options)
        value, trace = execute(program, clip, ctx, self.budget)
        result.trace = trace.to_json_dicts()
        if trace.error is not None:
            result.outcome = "module_failure"
            result.error = trace.error
            return result

        raw = harness.value_to_text(value)
        result.raw_answer = raw
        if options:
            idx = harness.chosen_option_index(value, tuple(options))
            result.option_index = idx
            result.answer = options[idx - 1] if idx is not None else raw
        elif self.matcher is not None:
            result.answer = self.matcher.match(raw, self.config.vocab_mode).answer
        else:
            result.answer = normalize_answer(raw)
        return result

    # --- other capabilities ---

    def edit(self, video_id: str, predicate: str, mode: str) -> EditResult:
        if mode not in ("remove_matching", "keep_matching"):
            raise ConfigError(f"unknown edit mode: {mode}")
        if not predicate:
            raise ConfigError("edit predicate must be non-empty")
        source = self.videos.source(video_id)
        clip = full_clip(source)
        ctx = self._context(source, None)
        matching = filter_property(ctx, clip, predicate)
        matched = set(matching.indices())
        if mode == "keep_matching":
            kept = sorted(matched)
        else:
            kept = [i for i in range(source.frame_count) if i not in matched]
        segments = harness.segments_from_kept(kept, source.fps)
        manifest = []
        for i in kept:
            frame = source.frame(i)
            manifest.append({"frame": i, "path": frame.image_path})
        return EditResult(
            video_id=video_id, predicate=predicate, mode=mode,
            segments=[{"start_frame": s.start_frame, "end_frame": s.end_frame,
                       "start_s": s.start_s, "end_s": s.end_s} for s in segments],
            kept_frames=kept, manifest=manifest,
        )

    def track(self, video_id: str, query: str) -> TrackResult:
        if not query:
            raise ConfigError("track query must be non-empty")
        source = self.videos.source(video_id)
        requests = [CapabilityRequest(Capability.DETECT, video_id=video_id, frame=i, text=query)
                    for i in range(source.frame_count)]
        responses = self.gateway.call_many(requests)
        per_frame: list[list[Detection]] = []
        for i, resp in enumerate(responses):
            per_frame.append([Detection(i, box, score) for box, score in resp.boxes()])
        tracks = track_objects(per_frame, self.tracker_params)
        return TrackResult(
            video_id=video_id, query=query,
            tracks=[_track_summary(t) for t in tracks],
            export_lines=export_jsonl(tracks),
        )

    def summarize(self, video_id: str, chunk_seconds: float | None = None) -> SummarizeResult:
        source = self.videos.source(video_id)
        length = chunk_seconds if chunk_seconds is not None else self.config.chunk_seconds
        spans = chunk(source, length)
        captions, _ = caption_chunks(self.gateway, source, spans)
        summary = summarize_captions(self.gateway, source, captions,
                                     max_tokens=self.config.llm_max_tokens)
        return SummarizeResult(
            video_id=video_id,
            chunks=[{"start_s": float(c.start_s), "end_s": float(c.end_s), "caption": c.caption}
                    for c in captions],
            paragraph=summary.paragraph,
            prompt_fingerprint=summary.prompt_fingerprint,
        )

    def close(self) -> None:
        self.gateway.close()


def _track_summary(track: Track) -> dict:
    return {
        "track_id": track.track_id,
        "first_frame": track.first_frame,
        "last_frame": track.last_frame,
        "length": len(track.boxes),
    }
