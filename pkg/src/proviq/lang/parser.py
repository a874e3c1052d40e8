"""Parse source text into the restricted AST.

We reuse Python's tokenizer/parser for the surface syntax, then translate
the resulting tree into our own node set, rejecting everything outside the
accepted grammar with a positioned diagnostic. Nothing is ever exec()'d.
"""

from __future__ import annotations

import ast

from ..errors import ProgramSyntaxError
from . import nodes as n


def parse(source_text: str) -> n.Program:
    """Parse program text, raising ProgramSyntaxError (1-based line/col) if
    the text is outside the grammar."""
    try:
        module = ast.parse(source_text)
    except SyntaxError as exc:
        line = exc.lineno or 1
        col = (exc.offset or 1)
        raise ProgramSyntaxError(line, col, exc.msg or "invalid syntax") from None

    defs = [s for s in module.body if isinstance(s, ast.FunctionDef)]
    if len(defs) != 1 or len(module.body) != 1:
        bad = module.body[1] if len(module.body) > 1 else (module.body[0] if module.body else None)
        line, col = _pos(bad) if bad is not None else (1, 1)
        raise ProgramSyntaxError(line, col, "program must be exactly one function definition")
    fn = defs[0]
    if fn.decorator_list:
        line, col = _pos(fn.decorator_list[0])
        raise ProgramSyntaxError(line, col, "decorators are not allowed")
    args = fn.args
    if args.posonlyargs or args.kwonlyargs or args.vararg or args.kwarg or args.defaults or args.kw_defaults:
        raise ProgramSyntaxError(fn.lineno, fn.col_offset + 1, "only plain positional parameters are allowed")
    params = tuple(a.arg for a in args.args)
    body = tuple(_stmt(s) for s in fn.body)
    return n.Program(fn.name, params, body, line=fn.lineno, col=fn.col_offset + 1)


def _pos(node: ast.AST) -> tuple[int, int]:
    return getattr(node, "lineno", 1), getattr(node, "col_offset", 0) + 1


def _reject(node: ast.AST, what: str) -> ProgramSyntaxError:
    line, col = _pos(node)
    return ProgramSyntaxError(line, col, f"{what} is not allowed")


def _stmt(s: ast.stmt) -> n.Stmt:
    line, col = _pos(s)
    if isinstance(s, ast.Assign):
        if len(s.targets) != 1 or not isinstance(s.targets[0], ast.Name):
            raise _reject(s, "assignment to anything but a single name")
        return n.Assign(s.targets[0].id, _expr(s.value), line=line, col=col)
    if isinstance(s, ast.Return):
        if s.value is None:
            raise ProgramSyntaxError(line, col, "return must carry a value")
        return n.Return(_expr(s.value), line=line, col=col)
    if isinstance(s, ast.If):
        then_body = tuple(_stmt(x) for x in s.body)
        else_body = tuple(_stmt(x) for x in s.orelse)
        return n.If(_expr(s.test), then_body, else_body, line=line, col=col)
    raise _reject(s, _describe_stmt(s))


def _describe_stmt(s: ast.stmt) -> str:
    names = {
        ast.For: "for loop", ast.While: "while loop", ast.Import: "import",
        ast.ImportFrom: "import", ast.FunctionDef: "nested function definition",
        ast.ClassDef: "class definition", ast.With: "with block", ast.Try: "try block",
        ast.AugAssign: "augmented assignment", ast.AnnAssign: "annotated assignment",
        ast.Expr: "expression statement", ast.Raise: "raise", ast.Assert: "assert",
        ast.Delete: "delete", ast.Global: "global", ast.Nonlocal: "nonlocal",
        ast.Pass: "pass", ast.Break: "break", ast.Continue: "continue",
    }
    return names.get(type(s), f"statement {type(s).__name__}")


_ARITH_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.FloorDiv: "//"}
_CMP_OPS = {ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">="}


def _expr(e: ast.expr) -> n.Expr:
    line, col = _pos(e)
    if isinstance(e, ast.Constant):
        v = e.value
        if isinstance(v, bool) or isinstance(v, int) or isinstance(v, str):
            return n.Literal(v, line=line, col=col)
        raise ProgramSyntaxError(line, col, f"literal of type {type(v).__name__} is not allowed")
    if isinstance(e, ast.UnaryOp) and isinstance(e.op, ast.USub) \
            and isinstance(e.operand, ast.Constant) and type(e.operand.value) is int:
        return n.Literal(-e.operand.value, line=line, col=col)
    if isinstance(e, ast.Name):
        return n.Name(e.id, line=line, col=col)
    if isinstance(e, ast.Call):
        if e.keywords:
            raise _reject(e.keywords[0].value, "keyword argument")
        args = tuple(_expr(a) for a in e.args)
        if isinstance(e.func, ast.Attribute):
            return n.MethodCall(_expr(e.func.value), e.func.attr, args, line=line, col=col)
        if isinstance(e.func, ast.Name):
            return n.BuiltinCall(e.func.id, args, line=line, col=col)
        raise _reject(e, "call of a computed expression")
    if isinstance(e, ast.Attribute):
        return n.Attribute(_expr(e.value), e.attr, line=line, col=col)
    if isinstance(e, ast.BinOp):
        op = _ARITH_OPS.get(type(e.op))
        if op is None:
            raise _reject(e, f"operator {type(e.op).__name__}")
        return n.Arith(op, _expr(e.left), _expr(e.right), line=line, col=col)
    if isinstance(e, ast.Compare):
        if len(e.ops) != 1:
            raise _reject(e, "chained comparison")
        op = _CMP_OPS.get(type(e.ops[0]))
        if op is None:
            raise _reject(e, f"comparison {type(e.ops[0]).__name__}")
        return n.Compare(op, _expr(e.left), _expr(e.comparators[0]), line=line, col=col)
    if isinstance(e, ast.List):
        return n.ListLiteral(tuple(_expr(x) for x in e.elts), line=line, col=col)
    if isinstance(e, ast.Dict):
        pairs = []
        for k, v in zip(e.keys, e.values):
            if k is None:
                raise _reject(e, "dict unpacking")
            pairs.append((_expr(k), _expr(v)))
        return n.MapLiteral(tuple(pairs), line=line, col=col)
    if isinstance(e, ast.Subscript):
        if isinstance(e.slice, ast.Slice):
            raise _reject(e, "slice expression")
        return n.IndexAccess(_expr(e.value), _expr(e.slice), line=line, col=col)
    names = {
        ast.BoolOp: "boolean operator", ast.Lambda: "lambda", ast.IfExp: "conditional expression",
        ast.JoinedStr: "f-string", ast.Tuple: "tuple", ast.Set: "set literal",
        ast.ListComp: "comprehension", ast.SetComp: "comprehension", ast.DictComp: "comprehension",
        ast.GeneratorExp: "generator expression", ast.UnaryOp: "unary operator",
        ast.Starred: "star expression", ast.Await: "await", ast.NamedExpr: "walrus assignment",
    }
    raise _reject(e, names.get(type(e), f"expression {type(e).__name__}"))
