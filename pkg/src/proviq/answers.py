"""Map free-form program output onto a benchmark's answer vocabulary.

Phrases embed as the mean of their token vectors; matching is an exact-match
shortcut followed by a cosine nearest-neighbor linear scan (vocabularies are
small enough that no index is warranted). Vocabularies can be constrained to
the top-K training answers or further to the answers seen for the question's
type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .textnorm import phrase_key, tokenize


class EmbeddingTable:
    """token -> vector, loaded from the common text distribution format:
    a "count dim" header line, then one "token v1 ... vd" line per token.
    Lookup is case-insensitive; the first spelling of a token wins."""

    def __init__(self, dim: int):
        self.dim = dim
        self._vectors: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._vectors

    def add(self, token: str, vector) -> None:
        v = np.asarray(vector, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ConfigError(f"vector for {token!r} has shape {v.shape}, want ({self.dim},)")
        self._vectors.setdefault(token.lower(), v)

    def get(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token.lower())

    @classmethod
    def load(cls, path: str) -> EmbeddingTable:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ConfigError(f"{path}: expected 'count dim' header line")
            try:
                count, dim = int(header[0]), int(header[1])
            except ValueError:
                raise ConfigError(f"{path}: bad header {header!r}") from None
            table = cls(dim)
            for lineno, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < dim + 1:
                    raise ConfigError(f"{path}:{lineno}: expected token plus {dim} values")
                token = parts[0]
                table.add(token, [float(x) for x in parts[-dim:]])
        if len(table) < count:
            raise ConfigError(f"{path}: header promises {count} tokens, got {len(table)}")
        return table

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self._vectors)} {self.dim}\n")
            for token, v in self._vectors.items():
                fh.write(token + " " + " ".join(repr(float(x)) for x in v) + "\n")


def embed_phrase(phrase: str, table: EmbeddingTable) -> np.ndarray:
    """Mean of the in-table token vectors; unknown tokens are skipped and a
    phrase of only unknown tokens embeds to the zero vector."""
    vectors = [table.get(t) for t in tokenize(phrase)]
    vectors = [v for v in vectors if v is not None]
    if not vectors:
        return np.zeros(table.dim)
    return np.mean(vectors, axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v)) / (nu * nv)


@dataclass
class Vocabulary:
    """Unique answers in frequency order, the top-K bound, and per-type
    subsets (each a subset of the top-K answers)."""

    answers: list[str]
    k: int
    by_type: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.answers:
            raise ConfigError("vocabulary needs at least one answer")
        if self.k < 1:
            raise ConfigError(f"vocabulary bound K must be >= 1, got {self.k}")
        top = set(self.top_k())
        for qtype, subset in self.by_type.items():
            extra = [a for a in subset if a not in top]
            if extra:
                raise ConfigError(f"type {qtype!r} answers {extra} are not in the top-{self.k} set")

    def top_k(self) -> list[str]:
        return self.answers[: self.k]

    def active(self, mode: str, question_type: str | None = None) -> list[str]:
        if mode == "none":
            return self.answers
        if mode == "top_k":
            return self.top_k()
        if mode == "type_based":
            if question_type is not None and question_type in self.by_type:
                return self.by_type[question_type]
            return self.top_k()
        raise ConfigError(f"unknown vocabulary mode: {mode}")

    @classmethod
    def load(cls, path: str) -> Vocabulary:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        answers = doc.get("answers")
        if not isinstance(answers, list) or not answers:
            raise ConfigError(f"{path}: vocabulary needs a non-empty 'answers' list")
        deduped: list[str] = []
        seen = set()
        for a in answers:
            key = phrase_key(a)
            if key not in seen:
                seen.add(key)
                deduped.append(a)
        return cls(answers=deduped, k=doc.get("k", len(deduped)),
                   by_type={t: list(v) for t, v in doc.get("by_type", {}).items()})

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"answers": self.answers, "k": self.k, "by_type": self.by_type},
                      fh, ensure_ascii=False, indent=1)


def build_vocab(training: list[tuple[str, str | None]], k: int,
                mode: str = "top_k") -> Vocabulary:
    """Top-K answers by frequency (ties broken by first occurrence). In
    type_based mode, each question type additionally indexes the answers seen
    for that type that made the top-K cut.

    Answers are tallied by normalized form so the vocabulary never contains
    two spellings of one phrase.
    """
    if k < 1:
        raise ConfigError(f"K must be >= 1, got {k}")
    if not training:
        raise ConfigError("empty training answer list")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    types_for: dict[str, set[str]] = {}
    for i, (answer, qtype) in enumerate(training):
        key = phrase_key(answer)
        counts[key] = counts.get(key, 0) + 1
        first_seen.setdefault(key, i)
        if qtype is not None:
            types_for.setdefault(key, set()).add(qtype)
    ordered = sorted(counts, key=lambda a: (-counts[a], first_seen[a]))
    top = ordered[:k]
    by_type: dict[str, list[str]] = {}
    if mode == "type_based":
        for answer in top:  # keep frequency order inside each type subset
            for qtype in sorted(types_for.get(answer, ())):
                by_type.setdefault(qtype, []).append(answer)
    return Vocabulary(answers=ordered, k=k, by_type=by_type)


@dataclass(frozen=True)
class MatchResult:
    answer: str
    similarity: float
    exact: bool
    degenerate: bool = False  # raw phrase embedded to the zero vector


class AnswerMatcher:
    """Precomputes vocabulary embeddings once; match() is pure after that."""

    def __init__(self, table: EmbeddingTable, vocab: Vocabulary):
        self.table = table
        self.vocab = vocab
        self._keys = [phrase_key(a) for a in vocab.answers]
        self._key_index = {}
        for i, key in enumerate(self._keys):
            self._key_index.setdefault(key, i)
        self._embeddings = np.stack([embed_phrase(a, table) for a in vocab.answers]) \
            if vocab.answers else np.zeros((0, table.dim))
        self._norms = np.linalg.norm(self._embeddings, axis=1)

    def match(self, raw: str, mode: str = "none",
              question_type: str | None = None) -> MatchResult:
        active = self.vocab.active(mode, question_type)
        if not active:
            raise ConfigError(f"empty active vocabulary (mode={mode}, type={question_type})")
        active_idx = [self._key_index[phrase_key(a)] for a in active]

        raw_key = phrase_key(raw)
        for i in active_idx:
            if self._keys[i] == raw_key:
                return MatchResult(self.vocab.answers[i], 1.0, exact=True)

        q = embed_phrase(raw, self.table)
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            return MatchResult(self.vocab.answers[active_idx[0]], 0.0, exact=False, degenerate=True)
        best_i, best_sim = active_idx[0], -2.0
        for i in active_idx:
            vn = self._norms[i]
            sim = 0.0 if vn == 0.0 else float(np.dot(self._embeddings[i], q)) / (vn * qn)
            if sim > best_sim:
                best_i, best_sim = i, sim
        return MatchResult(self.vocab.answers[best_i], best_sim, exact=False)
