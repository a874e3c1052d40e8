"""Static checks on parsed programs.

The validator never raises; it returns a report listing every violation
with its position, so generation retries can feed diagnostics back.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import nodes as n


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]


def validate(program: n.Program, task_kind: str) -> ValidationReport:
    """Check entry signature for the task kind, whitelisting of every call
    and attribute, return coverage of all control paths, and that every name
    is defined before use."""
    out: list[Violation] = []

    expected = n.ENTRY_SIGNATURES.get(task_kind)
    if expected is None:
        out.append(Violation("bad-task", f"unknown task kind: {task_kind}", program.line, program.col))
    else:
        name, params = expected
        if program.entry_name != name or program.params != params:
            sig = f"{name}({', '.join(params)})"
            got = f"{program.entry_name}({', '.join(program.params)})"
            out.append(Violation(
                "bad-signature",
                f"task {task_kind} expects entry {sig}, got {got}",
                program.line, program.col,
            ))

    defined = set(program.params)
    _check_body(program.body, defined, out)

    if not _returns_on_all_paths(program.body):
        out.append(Violation("missing-return", "missing return path", program.line, program.col))

    return ValidationReport(out)


def _check_body(body: tuple[n.Stmt, ...], defined: set[str], out: list[Violation]) -> set[str]:
    for stmt in body:
        if isinstance(stmt, n.Assign):
            _check_expr(stmt.expr, defined, out)
            defined = defined | {stmt.target}
        elif isinstance(stmt, n.Return):
            _check_expr(stmt.expr, defined, out)
        elif isinstance(stmt, n.If):
            _check_expr(stmt.cond, defined, out)
            d1 = _check_body(stmt.then_body, set(defined), out)
            d2 = _check_body(stmt.else_body, set(defined), out)
            defined = d1 & d2  # only names assigned on both branches survive
    return defined


def _check_expr(e: n.Expr, defined: set[str], out: list[Violation]) -> None:
    if isinstance(e, n.Name):
        if e.id not in defined:
            out.append(Violation("use-before-assign", f"name used before assignment: {e.id}", e.line, e.col))
    elif isinstance(e, n.MethodCall):
        if e.method not in n.METHOD_WHITELIST:
            out.append(Violation("unknown-method", f"unknown method: {e.method}", e.line, e.col))
        _check_expr(e.receiver, defined, out)
        for a in e.args:
            _check_expr(a, defined, out)
    elif isinstance(e, n.BuiltinCall):
        if e.name not in n.BUILTIN_WHITELIST:
            out.append(Violation("unknown-function", f"unknown function: {e.name}", e.line, e.col))
        for a in e.args:
            _check_expr(a, defined, out)
    elif isinstance(e, n.Attribute):
        if e.name not in n.ATTRIBUTE_WHITELIST:
            out.append(Violation("unknown-attribute", f"unknown attribute: {e.name}", e.line, e.col))
        _check_expr(e.receiver, defined, out)
    elif isinstance(e, (n.Arith, n.Compare)):
        _check_expr(e.lhs, defined, out)
        _check_expr(e.rhs, defined, out)
    elif isinstance(e, n.ListLiteral):
        for item in e.items:
            _check_expr(item, defined, out)
    elif isinstance(e, n.MapLiteral):
        for k, v in e.pairs:
            _check_expr(k, defined, out)
            _check_expr(v, defined, out)
    elif isinstance(e, n.IndexAccess):
        _check_expr(e.receiver, defined, out)
        _check_expr(e.key, defined, out)
    # Literal: nothing to check


def _returns_on_all_paths(body: tuple[n.Stmt, ...]) -> bool:
    for stmt in body:
        if isinstance(stmt, n.Return):
            return True
        if isinstance(stmt, n.If):
            if stmt.else_body and _returns_on_all_paths(stmt.then_body) \
                    and _returns_on_all_paths(stmt.else_body):
                return True
    return False
