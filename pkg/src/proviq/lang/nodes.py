"""AST for the restricted program language.

Nodes compare structurally; source positions are carried for diagnostics
but excluded from equality so round-tripped programs compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Node:
    line: int = field(default=0, compare=False, kw_only=True)
    col: int = field(default=0, compare=False, kw_only=True)


# --- expressions ---

@dataclass(frozen=True)
class Literal(Node):
    value: str | int | bool


@dataclass(frozen=True)
class Name(Node):
    id: str


@dataclass(frozen=True)
class MethodCall(Node):
    receiver: Expr
    method: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class BuiltinCall(Node):
    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Attribute(Node):
    receiver: Expr
    name: str


@dataclass(frozen=True)
class Arith(Node):
    op: str  # + - * //
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Compare(Node):
    op: str  # == != < <= > >=
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class ListLiteral(Node):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class MapLiteral(Node):
    pairs: tuple[tuple[Expr, Expr], ...]  # insertion order preserved


@dataclass(frozen=True)
class IndexAccess(Node):
    receiver: Expr
    key: Expr


Expr = Literal | Name | MethodCall | BuiltinCall | Attribute | Arith | Compare | ListLiteral | MapLiteral | IndexAccess


# --- statements ---

@dataclass(frozen=True)
class Assign(Node):
    target: str
    expr: Expr


@dataclass(frozen=True)
class Return(Node):
    expr: Expr


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then_body: tuple[Stmt, ...]
    else_body: tuple[Stmt, ...]


Stmt = Assign | Return | If


@dataclass(frozen=True)
class Program(Node):
    entry_name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]


# Methods generated programs may call on clip values, and the free functions
# they may call. The validator enforces these; the parser is purely structural.
METHOD_WHITELIST = frozenset({
    "filter_property", "filter_object", "find", "video_query", "get_caption",
    "get_script", "get_summary", "track_objects", "choose_option", "trim",
})
BUILTIN_WHITELIST = frozenset({"get_max_key", "len"})
ATTRIBUTE_WHITELIST = frozenset({"num_frames"})

ENTRY_SIGNATURES = {
    "qa": ("answer_question", ("video", "possible_answers")),
    "multiple_choice": ("answer_question", ("video", "possible_answers")),
    "edit": ("run", ("video",)),
    "track": ("run", ("video",)),
}
