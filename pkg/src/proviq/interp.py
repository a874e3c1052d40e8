"""Sandboxed evaluation of validated programs against a clip and a backend
gateway, under statement/backend-call/wall-clock budgets.

Execution is single-threaded per program (primitives may fan out their own
per-frame requests); failures abort the program and are carried in the trace
with the statement index, so whole-question outcomes attribute to a single
cause.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from . import primitives as prim
from . import summarize as summ
from . import tracking
from .clips import VideoClip, trim as clip_trim
from .errors import BudgetExceeded, InvalidArgument, ModuleError, ProgramTypeError
from .gateway import Capability, CapabilityRequest, CapabilityResponse
from .lang import nodes as n
from .lang.render import render_expr
from .primitives import CropClip, OptionChoice, RunContext

Value = Any  # clip | crop clip | str | int | bool | list | dict | tracks | OptionChoice


@dataclass(frozen=True)
class ExecBudget:
    max_statements: int = 1000
    max_backend_calls: int = 5000
    wall_clock_limit_s: float = 600.0

    def __post_init__(self):
        if self.max_statements <= 0 or self.max_backend_calls <= 0 or self.wall_clock_limit_s <= 0:
            raise InvalidArgument("budgets must be positive")


@dataclass
class TraceEntry:
    index: int
    op: str
    args: str
    duration_s: float = 0.0
    requests: int = 0            # capability requests incl. cache hits
    backend_calls: int = 0       # actual backend invocations
    capabilities: dict[str, int] = field(default_factory=dict)
    log_span: tuple[int, int] = (0, 0)

    def to_json_dict(self) -> dict:
        # durations are wall-clock noise; serialized traces stay byte-stable
        return {
            "index": self.index,
            "op": self.op,
            "args": self.args,
            "requests": self.requests,
            "capabilities": {k: self.capabilities[k] for k in sorted(self.capabilities)},
        }


@dataclass
class ExecTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    error: dict | None = None    # {kind, code?, message, statement}

    @property
    def ok(self) -> bool:
        return self.error is None

    def capabilities_used(self) -> set[str]:
        used: set[str] = set()
        for e in self.entries:
            used.update(e.capabilities)
        return used

    def to_json_dicts(self) -> list[dict]:
        out = [e.to_json_dict() for e in self.entries]
        out.append({"outcome": "ok" if self.ok else "error", "error": self.error})
        return out


class _GatewayProxy:
    """Budget- and trace-aware wrapper the primitives talk to."""

    def __init__(self, gateway, budget: ExecBudget, started: float):
        self._gw = gateway
        self._budget = budget
        self._started = started
        self.backend_calls = 0
        self.window_requests = 0
        self.window_backend = 0
        self.window_caps: dict[str, int] = {}

    def supports(self, capability: Capability) -> bool:
        return self._gw.supports(capability)

    def reset_window(self) -> None:
        self.window_requests = 0
        self.window_backend = 0
        self.window_caps = {}

    def check_clock(self) -> None:
        if time.monotonic() - self._started > self._budget.wall_clock_limit_s:
            raise BudgetExceeded("wall_clock", self._budget.wall_clock_limit_s)

    def _account(self, requests, responses) -> None:
        for request in requests:
            self.window_requests += 1
            cap = request.capability.value
            self.window_caps[cap] = self.window_caps.get(cap, 0) + 1
        for resp in responses:
            if isinstance(resp, CapabilityResponse) and not resp.from_cache:
                self.backend_calls += 1
                self.window_backend += 1
        if self.backend_calls > self._budget.max_backend_calls:
            raise BudgetExceeded("backend_calls", self._budget.max_backend_calls)

    def call(self, request: CapabilityRequest) -> CapabilityResponse:
        self.check_clock()
        resp = self._gw.call(request)
        self._account([request], [resp])
        return resp

    def call_many(self, requests) -> list[CapabilityResponse]:
        self.check_clock()
        responses = self._gw.call_many(requests)
        self._account(requests, responses)
        return responses

    def call_many_settled(self, requests):
        self.check_clock()
        outcomes = self._gw.call_many_settled(requests)
        self._account(requests, outcomes)
        return outcomes


def get_max_key(counts: dict[str, int]) -> str:
    """Key with the highest count; ties break to the earliest inserted key."""
    if not isinstance(counts, dict):
        raise ProgramTypeError("get_max_key", "a counter map", type(counts).__name__)
    if not counts:
        raise ModuleError("get_max_key", "EmptyCounter", "counter map is empty")
    best_key, best_count = None, -1
    for key, count in counts.items():
        if count > best_count:
            best_key, best_count = key, count
    return best_key  # type: ignore[return-value]


class _ReturnSignal(Exception):
    def __init__(self, value: Value):
        self.value = value


class _Interpreter:
    def __init__(self, ctx: RunContext, proxy: _GatewayProxy, budget: ExecBudget):
        self.ctx = ctx
        self.proxy = proxy
        self.budget = budget
        self.trace = ExecTrace()
        self.statements = 0

    # --- statements ---

    def run(self, program: n.Program, env: dict[str, Value]) -> Value:
        try:
            self._body(program.body, env)
        except _ReturnSignal as ret:
            return ret.value
        raise ModuleError("execute", "NoReturn", "program finished without returning")

    def _body(self, body: tuple[n.Stmt, ...], env: dict[str, Value]) -> None:
        for stmt in body:
            self._statement(stmt, env)

    def _statement(self, stmt: n.Stmt, env: dict[str, Value]) -> None:
        self.proxy.check_clock()
        if self.statements >= self.budget.max_statements:
            raise BudgetExceeded("statements", self.budget.max_statements)
        index = self.statements
        self.statements += 1
        self.proxy.reset_window()
        op, args = _describe(stmt)
        entry = TraceEntry(index=index, op=op, args=args)
        self.trace.entries.append(entry)
        log_start = self._log_len()
        started = time.monotonic()
        try:
            if isinstance(stmt, n.Assign):
                env[stmt.target] = self._eval(stmt.expr, env)
            elif isinstance(stmt, n.Return):
                raise _ReturnSignal(self._eval(stmt.expr, env))
            elif isinstance(stmt, n.If):
                cond = self._eval(stmt.cond, env)
                if not isinstance(cond, bool):
                    raise ProgramTypeError("if", "bool condition", type(cond).__name__)
                self._body(stmt.then_body if cond else stmt.else_body, env)
        finally:
            entry.duration_s = time.monotonic() - started
            entry.requests = self.proxy.window_requests
            entry.backend_calls = self.proxy.window_backend
            entry.capabilities = dict(self.proxy.window_caps)
            entry.log_span = (log_start, self._log_len())

    def _log_len(self) -> int:
        gw = self.proxy._gw
        return gw.log_length() if hasattr(gw, "log_length") else 0

    # --- expressions ---

    def _eval(self, e: n.Expr, env: dict[str, Value]) -> Value:
        if isinstance(e, n.Literal):
            return e.value
        if isinstance(e, n.Name):
            if e.id not in env:
                raise ProgramTypeError("name", "a defined name", e.id)
            return env[e.id]
        if isinstance(e, n.Arith):
            return self._arith(e, env)
        if isinstance(e, n.Compare):
            return self._compare(e, env)
        if isinstance(e, n.ListLiteral):
            return [self._eval(x, env) for x in e.items]
        if isinstance(e, n.MapLiteral):
            out: dict[str, Value] = {}
            for k, v in e.pairs:
                key = self._eval(k, env)
                if not isinstance(key, str):
                    raise ProgramTypeError("map key", "str", type(key).__name__)
                out[key] = self._eval(v, env)
            return out
        if isinstance(e, n.IndexAccess):
            return self._index(e, env)
        if isinstance(e, n.Attribute):
            receiver = self._eval(e.receiver, env)
            if e.name == "num_frames":
                if isinstance(receiver, (VideoClip, CropClip)):
                    return receiver.num_frames
                raise ProgramTypeError("num_frames", "a clip", type(receiver).__name__)
            raise ProgramTypeError("attribute", "num_frames", e.name)
        if isinstance(e, n.BuiltinCall):
            return self._builtin(e, env)
        if isinstance(e, n.MethodCall):
            return self._method(e, env)
        raise ProgramTypeError("expression", "a supported node", type(e).__name__)

    def _arith(self, e: n.Arith, env) -> int:
        lhs, rhs = self._eval(e.lhs, env), self._eval(e.rhs, env)
        for v in (lhs, rhs):
            if type(v) is not int:
                raise ProgramTypeError(e.op, "int operands", type(v).__name__)
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        if e.op == "*":
            return lhs * rhs
        if e.op == "//":
            if rhs == 0:
                raise ProgramTypeError("//", "a non-zero divisor", "0")
            return lhs // rhs
        raise ProgramTypeError("arith", "+ - * //", e.op)

    def _compare(self, e: n.Compare, env) -> bool:
        lhs, rhs = self._eval(e.lhs, env), self._eval(e.rhs, env)
        if e.op == "==":
            return lhs == rhs
        if e.op == "!=":
            return lhs != rhs
        for v in (lhs, rhs):
            if type(v) is not int:
                raise ProgramTypeError(e.op, "int operands", type(v).__name__)
        return {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs}[e.op]

    def _index(self, e: n.IndexAccess, env) -> Value:
        receiver = self._eval(e.receiver, env)
        key = self._eval(e.key, env)
        if isinstance(receiver, list):
            if type(key) is not int:
                raise ProgramTypeError("index", "int", type(key).__name__)
            if not -len(receiver) <= key < len(receiver):
                raise ModuleError("index", "IndexOutOfRange", f"index {key} into list of {len(receiver)}")
            return receiver[key]
        if isinstance(receiver, dict):
            if not isinstance(key, str):
                raise ProgramTypeError("index", "str key", type(key).__name__)
            if key not in receiver:
                raise ModuleError("index", "KeyMissing", f"no key {key!r}")
            return receiver[key]
        raise ProgramTypeError("index", "list or map", type(receiver).__name__)

    def _builtin(self, e: n.BuiltinCall, env) -> Value:
        args = [self._eval(a, env) for a in e.args]
        if e.name == "get_max_key":
            self._arity("get_max_key", args, 1)
            return get_max_key(args[0])
        if e.name == "len":
            self._arity("len", args, 1)
            v = args[0]
            if isinstance(v, (VideoClip, CropClip)):
                return v.num_frames
            if isinstance(v, (list, dict, str)):
                return len(v)
            raise ProgramTypeError("len", "clip, list, map or str", type(v).__name__)
        raise ProgramTypeError("call", "a whitelisted function", e.name)

    def _method(self, e: n.MethodCall, env) -> Value:
        receiver = self._eval(e.receiver, env)
        args = [self._eval(a, env) for a in e.args]
        method = e.method
        ctx = self._proxy_ctx()

        if method == "choose_option":
            self._arity(method, args, 3)
            question, context, options = args
            self._want(method, "question", question, str)
            self._want(method, "context", context, dict)
            self._want(method, "options", options, list)
            return prim.choose_option(ctx, question, context, [str(o) for o in options])

        if method == "get_summary":
            self._arity(method, args, 0)
            self._want_clip(method, receiver)
            summary = summ.get_summary(ctx.gateway, receiver.source, ctx.chunk_seconds,
                                       max_tokens=ctx.llm_max_tokens)
            return summary.paragraph

        if method == "track_objects":
            self._arity(method, args, 1)
            self._want_clip(method, receiver)
            crops = args[0]
            if not isinstance(crops, CropClip):
                raise ProgramTypeError(method, "crops from find()", type(crops).__name__)
            timeline = receiver.indices() if isinstance(receiver, VideoClip) \
                else sorted({c.frame.index for c in crops.crops})
            allowed = set(timeline)
            detections = [tracking.Detection(c.frame.index, c.box, c.score)
                          for c in crops.crops if c.frame.index in allowed]
            per_frame = tracking.group_by_frame(detections, timeline)
            params = ctx.tracker_params or tracking.TrackerParams()
            return tracking.track_objects(per_frame, params)

        self._want_clip(method, receiver)
        if method == "trim":
            self._arity(method, args, 2)
            if not isinstance(receiver, VideoClip):
                raise ProgramTypeError(method, "a frame clip", type(receiver).__name__)
            a, b = args
            for v in (a, b):
                if type(v) is not int:
                    raise ProgramTypeError(method, "int positions", type(v).__name__)
            try:
                return clip_trim(receiver, a, b)
            except InvalidArgument as exc:
                raise ModuleError("trim", "InvalidArgument", str(exc)) from exc
        if method == "filter_property":
            self._arity(method, args, 1)
            self._want(method, "property", args[0], str)
            return prim.filter_property(ctx, receiver, args[0])
        if method == "filter_object":
            self._arity(method, args, 1)
            self._want(method, "object", args[0], str)
            return prim.filter_object(ctx, receiver, args[0])
        if method == "find":
            self._arity(method, args, 1)
            self._want(method, "object", args[0], str)
            return prim.find(ctx, receiver, args[0])
        if method == "video_query":
            if len(args) not in (1, 2):
                raise ProgramTypeError(method, "1 or 2 arguments", str(len(args)))
            self._want(method, "query", args[0], str)
            possible = args[1] if len(args) == 2 else None
            if possible is not None and not isinstance(possible, list):
                raise ProgramTypeError(method, "a list of answers", type(possible).__name__)
            return prim.video_query(ctx, receiver, args[0], possible)
        if method == "get_caption":
            self._arity(method, args, 1)
            if type(args[0]) is not int:
                raise ProgramTypeError(method, "int index", type(args[0]).__name__)
            return prim.get_caption(ctx, receiver, args[0])
        if method == "get_script":
            self._arity(method, args, 0)
            return prim.get_script(ctx, receiver)
        raise ProgramTypeError("call", "a whitelisted method", method)

    def _proxy_ctx(self) -> RunContext:
        ctx = self.ctx
        return RunContext(gateway=self.proxy, video=ctx.video, options=ctx.options,  # type: ignore[arg-type]
                          detect_threshold=ctx.detect_threshold, chunk_seconds=ctx.chunk_seconds,
                          llm_max_tokens=ctx.llm_max_tokens, tracker_params=ctx.tracker_params)

    @staticmethod
    def _arity(op: str, args: list, want: int) -> None:
        if len(args) != want:
            raise ProgramTypeError(op, f"{want} argument(s)", str(len(args)))

    @staticmethod
    def _want(op: str, label: str, value, kind: type) -> None:
        if not isinstance(value, kind):
            raise ProgramTypeError(op, f"{label}: {kind.__name__}", type(value).__name__)

    @staticmethod
    def _want_clip(op: str, value) -> None:
        if not isinstance(value, (VideoClip, CropClip)):
            raise ProgramTypeError(op, "a clip receiver", type(value).__name__)


def _describe(stmt: n.Stmt) -> tuple[str, str]:
    if isinstance(stmt, n.Assign):
        op = stmt.expr.method if isinstance(stmt.expr, n.MethodCall) \
            else stmt.expr.name if isinstance(stmt.expr, n.BuiltinCall) else "assign"
        text = f"{stmt.target} = {render_expr(stmt.expr)}"
    elif isinstance(stmt, n.Return):
        op = stmt.expr.method if isinstance(stmt.expr, n.MethodCall) \
            else stmt.expr.name if isinstance(stmt.expr, n.BuiltinCall) else "return"
        text = f"return {render_expr(stmt.expr)}"
    else:
        op, text = "if", f"if {render_expr(stmt.cond)}"
    if len(text) > 160:
        text = text[:157] + "..."
    return op, text


def execute(program: n.Program, clip: VideoClip, ctx: RunContext,
            budget: ExecBudget | None = None) -> tuple[Value | None, ExecTrace]:
    """Run a validated program on a clip. Returns (value, trace); on failure
    the value is None and the trace carries {kind, code, message, statement}.
    Deterministic given deterministic backends; never mutates the clip.
    """
    budget = budget or ExecBudget()
    started = time.monotonic()
    proxy = _GatewayProxy(ctx.gateway, budget, started)
    interp = _Interpreter(ctx, proxy, budget)

    env: dict[str, Value] = {}
    if program.params:
        env[program.params[0]] = clip
    if len(program.params) > 1:
        env[program.params[1]] = list(ctx.options)

    try:
        value = interp.run(program, env)
        return value, interp.trace
    except ModuleError as exc:
        interp.trace.error = {
            "kind": "module", "code": exc.code, "op": exc.op,
            "message": str(exc), "statement": max(interp.statements - 1, 0),
        }
    except ProgramTypeError as exc:
        interp.trace.error = {
            "kind": "type", "op": exc.op, "message": str(exc),
            "statement": max(interp.statements - 1, 0),
        }
    except BudgetExceeded as exc:
        interp.trace.error = {
            "kind": "budget", "which": exc.which, "message": str(exc),
            "statement": max(interp.statements - 1, 0),
        }
    return None, interp.trace
