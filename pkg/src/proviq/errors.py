"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class ProviqError(Exception):
    """Base class for all engine errors."""


class ConfigError(ProviqError):
    """Bad or missing configuration (files, vocabularies, endpoints)."""


class InvalidArgument(ProviqError):
    """A caller violated an operation's precondition."""


class ProgramSyntaxError(ProviqError):
    """Source text outside the accepted program grammar."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class GenerationFailure(ProviqError):
    """Program generation did not yield a valid program, even after retry."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics) or "generation failed")
        self.diagnostics = list(diagnostics)


class ModuleError(ProviqError):
    """A visual/language primitive failed while a program was running.

    `code` is a stable short name (EmptyClip, EmptyCounter, IndexOutOfRange,
    NoTranscript, UnparseableChoice, SummaryFailed, BackendFailure, ...);
    `op` names the primitive that failed.
    """

    def __init__(self, op: str, code: str, detail: str = "", frame: int | None = None):
        msg = f"{op}: {code}"
        if detail:
            msg += f" ({detail})"
        if frame is not None:
            msg += f" [frame {frame}]"
        super().__init__(msg)
        self.op = op
        self.code = code
        self.detail = detail
        self.frame = frame


class ProgramTypeError(ProviqError):
    """A program applied an operation to values of the wrong type."""

    def __init__(self, op: str, expected: str, got: str):
        super().__init__(f"{op}: expected {expected}, got {got}")
        self.op = op
        self.expected = expected
        self.got = got


class BudgetExceeded(ProviqError):
    """An execution budget (statements, backend calls, wall clock) ran out."""

    def __init__(self, which: str, limit: float):
        super().__init__(f"budget exceeded: {which} (limit {limit})")
        self.which = which
        self.limit = limit


class BackendUnavailable(ProviqError):
    """A remote backend endpoint could not serve a request."""

    def __init__(self, endpoint: str, cause: str):
        super().__init__(f"{endpoint}: {cause}")
        self.endpoint = endpoint
        self.cause = cause


class MalformedResponse(ProviqError):
    """A backend response violated the wire schema."""


class MockMiss(ProviqError):
    """A mock world has no entry for the requested lookup."""

    def __init__(self, video_id: str, frame: int | None, key: str):
        at = f"frame {frame}" if frame is not None else "video"
        super().__init__(f"{video_id}/{at}: no mock entry for {key!r}")
        self.video_id = video_id
        self.frame = frame
        self.key = key


class WorldFormatError(ProviqError):
    """A mock-world file failed schema or totality validation."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
