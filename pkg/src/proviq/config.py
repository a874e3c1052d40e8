"""Engine configuration: one JSON document drives backends, thresholds,
budgets, prompting and post-processing. Relative paths resolve against the
config file's directory so asset bundles stay relocatable.
"""

from __future__ import annotations

import json
import os
from typing import Literal

from pydantic import BaseModel, Field, ValidationError

from .errors import ConfigError


class BackendSettings(BaseModel):
    endpoint: str | None = None      # None -> mock worlds serve everything
    token: str | None = None
    timeout_s: float = 60.0


class BudgetSettings(BaseModel):
    max_statements: int = Field(default=1000, gt=0)
    max_backend_calls: int = Field(default=5000, gt=0)
    wall_clock_limit_s: float = Field(default=600.0, gt=0)


class TrackerSettings(BaseModel):
    tau_high: float = 0.6
    tau_low: float = 0.1
    match_gate: float = 0.2
    max_age: int = 30
    min_hits: int = 3
    min_track_len: int = 5


class EngineConfig(BaseModel):
    # video + backend sources
    frames_dir: str | None = None
    mock_world: str | None = None    # one world file or a directory of them
    backend: BackendSettings = BackendSettings()
    cache_path: str | None = None
    max_concurrency: int = Field(default=1, ge=1)

    # execution
    detect_threshold: float = 0.35
    sample_frames: int = Field(default=60, ge=1)
    chunk_seconds: float = Field(default=1.0, gt=0)
    budget: BudgetSettings = BudgetSettings()
    tracker: TrackerSettings = TrackerSettings()
    llm_max_tokens: int = 512

    # generation
    generation_mode: Literal["fixture", "live"] = "fixture"
    fixtures_dir: str | None = None
    example_pool: str | None = None
    num_examples: int = Field(default=4, ge=0)
    api_methods: list[str] | None = None   # None -> full API
    temperature: float = 0.0

    # post-processing
    embedding_table: str | None = None
    vocab_file: str | None = None
    vocab_mode: Literal["none", "top_k", "type_based"] = "none"

    # bookkeeping
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    @classmethod
    def load(cls, path: str) -> EngineConfig:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        try:
            config = cls.model_validate(doc)
        except ValidationError as exc:
            raise ConfigError(f"config {path} is invalid: {exc}") from None
        return config.resolved(os.path.dirname(os.path.abspath(path)))

    def resolved(self, base_dir: str) -> EngineConfig:
        """Resolve relative paths against base_dir."""
        def fix(p: str | None) -> str | None:
            if p is None or os.path.isabs(p):
                return p
            return os.path.join(base_dir, p)

        return self.model_copy(update={
            "frames_dir": fix(self.frames_dir),
            "mock_world": fix(self.mock_world),
            "cache_path": fix(self.cache_path),
            "fixtures_dir": fix(self.fixtures_dir),
            "example_pool": fix(self.example_pool),
            "embedding_table": fix(self.embedding_table),
            "vocab_file": fix(self.vocab_file),
        })
