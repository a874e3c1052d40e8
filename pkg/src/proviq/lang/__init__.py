"""Restricted procedural language: grammar, AST, validator, renderer."""

from .nodes import (
    Arith, Assign, Attribute, BuiltinCall, Compare, If, IndexAccess, ListLiteral,
    Literal, MapLiteral, MethodCall, Name, Program, Return,
    ATTRIBUTE_WHITELIST, BUILTIN_WHITELIST, ENTRY_SIGNATURES, METHOD_WHITELIST,
)
from .parser import parse
from .render import render, render_expr
from .validator import ValidationReport, Violation, validate

__all__ = [
    "Arith", "Assign", "Attribute", "BuiltinCall", "Compare", "If", "IndexAccess",
    "ListLiteral", "Literal", "MapLiteral", "MethodCall", "Name", "Program", "Return",
    "ATTRIBUTE_WHITELIST", "BUILTIN_WHITELIST", "ENTRY_SIGNATURES", "METHOD_WHITELIST",
    "parse", "render", "render_expr", "validate", "ValidationReport", "Violation",
]
