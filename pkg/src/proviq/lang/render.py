"""Canonical textual form of a program; parse(render(p)) == p structurally."""

from __future__ import annotations

from . import nodes as n

_INDENT = "    "


def render(program: n.Program) -> str:
    lines = [f"def {program.entry_name}({', '.join(program.params)}):"]
    _render_body(program.body, 1, lines)
    return "\n".join(lines) + "\n"


def _render_body(body: tuple[n.Stmt, ...], depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    for stmt in body:
        if isinstance(stmt, n.Assign):
            lines.append(f"{pad}{stmt.target} = {render_expr(stmt.expr)}")
        elif isinstance(stmt, n.Return):
            lines.append(f"{pad}return {render_expr(stmt.expr)}")
        elif isinstance(stmt, n.If):
            lines.append(f"{pad}if {render_expr(stmt.cond)}:")
            _render_body(stmt.then_body, depth + 1, lines)
            if stmt.else_body:
                lines.append(f"{pad}else:")
                _render_body(stmt.else_body, depth + 1, lines)


def render_expr(e: n.Expr) -> str:
    if isinstance(e, n.Literal):
        return repr(e.value)
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.MethodCall):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"{_recv(e.receiver)}.{e.method}({args})"
    if isinstance(e, n.BuiltinCall):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, n.Attribute):
        return f"{_recv(e.receiver)}.{e.name}"
    if isinstance(e, n.Arith):
        return f"({render_expr(e.lhs)} {e.op} {render_expr(e.rhs)})"
    if isinstance(e, n.Compare):
        return f"({render_expr(e.lhs)} {e.op} {render_expr(e.rhs)})"
    if isinstance(e, n.ListLiteral):
        return "[" + ", ".join(render_expr(x) for x in e.items) + "]"
    if isinstance(e, n.MapLiteral):
        inner = ", ".join(f"{render_expr(k)}: {render_expr(v)}" for k, v in e.pairs)
        return "{" + inner + "}"
    if isinstance(e, n.IndexAccess):
        return f"{_recv(e.receiver)}[{render_expr(e.key)}]"
    raise TypeError(f"unknown expression node: {e!r}")


def _recv(e: n.Expr) -> str:
    # receivers of ., () and [] need parens unless they are primary already
    text = render_expr(e)
    if isinstance(e, (n.Name, n.MethodCall, n.BuiltinCall, n.Attribute, n.IndexAccess, n.ListLiteral, n.MapLiteral)):
        return text
    return f"({text})"
