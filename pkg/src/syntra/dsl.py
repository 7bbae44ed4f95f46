"""A small string-transformation language: s-expression parser + evaluator.

The language lets the whole pipeline run hermetically, without any guest
runtime: candidate pools for string tasks can be expressed, executed, and
perturbed entirely in-process. Evaluation is total — every failure mode is
an error output, never an exception — and has no loops or recursion, so it
terminates on every well-formed tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

from .core import OutputValue, Value
from .errors import SyntraError

__all__ = ["DslProgram", "DslSyntaxError", "parse_dsl", "print_dsl", "eval_dsl"]


class DslSyntaxError(SyntraError):
    """Malformed source; carries the 1-based line/column of the offence."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


# op name -> argument kinds after the op symbol
_ARITY: dict[str, tuple[str, ...]] = {
    "input": (),
    "lit": ("str",),
    "concat": ("expr", "expr"),
    "substring": ("expr", "int", "int"),
    "split_index": ("expr", "str", "int"),
    "replace": ("expr", "str", "str"),
    "upper": ("expr",),
    "lower": ("expr",),
    "take_while_class": ("expr", "class"),
    "drop_while_class": ("expr", "class"),
    "strip": ("expr",),
    "if_contains": ("expr", "str", "expr", "expr"),
}

_CLASS_PREDICATES: dict[str, Callable[[str], bool]] = {
    "alpha": str.isalpha,
    "digit": str.isdigit,
    "alnum": str.isalnum,
    "not_upper": lambda c: not c.isupper(),
}


@dataclass(frozen=True)
class DslProgram:
    """A parsed program. The tree is a nested tuple, head first."""

    ast: tuple

    def render(self) -> str:
        return print_dsl(self.ast)


class _Token:
    __slots__ = ("kind", "value", "line", "column")

    def __init__(self, kind: str, value: Any, line: int, column: int):
        self.kind = kind
        self.value = value
        self.line = line
        self.column = column


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch in "()":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == '"':
                    break
                if source[j] == "\n":
                    raise DslSyntaxError("unterminated string literal", start_line, start_col)
                j += 1
            if j >= n:
                raise DslSyntaxError("unterminated string literal", start_line, start_col)
            raw = source[i : j + 1]
            try:
                text = json.loads(raw)
            except json.JSONDecodeError:
                raise DslSyntaxError("invalid string escape", start_line, start_col) from None
            tokens.append(_Token("str", text, start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        # bare atom: integer or symbol
        j = i
        while j < n and source[j] not in ' \t\r\n()"':
            j += 1
        atom = source[i:j]
        tok_line, tok_col = line, col
        if atom.lstrip("-").isdigit() and atom not in ("-", ""):
            tokens.append(_Token("int", int(atom), tok_line, tok_col))
        else:
            tokens.append(_Token("sym", atom, tok_line, tok_col))
        col += j - i
        i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], source: str):
        self.tokens = tokens
        self.pos = 0
        # end-of-input position for error messages
        lines = source.splitlines() or [""]
        self.end = (len(lines), len(lines[-1]) + 1)

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expect: str) -> _Token:
        tok = self._peek()
        if tok is None:
            raise DslSyntaxError(f"unexpected end of input, expected {expect}", *self.end)
        self.pos += 1
        return tok

    def expression(self) -> tuple:
        tok = self._next("'('")
        if tok.kind != "(":
            raise DslSyntaxError(f"expected '(', got {tok.value!r}", tok.line, tok.column)
        head = self._next("an operator")
        if head.kind != "sym" or head.value not in _ARITY:
            raise DslSyntaxError(f"unknown operator {head.value!r}", head.line, head.column)
        parts: list[Any] = [head.value]
        for kind in _ARITY[head.value]:
            if kind == "expr":
                parts.append(self.expression())
                continue
            tok = self._next(f"a {kind} argument for {head.value!r}")
            if kind == "str":
                if tok.kind != "str":
                    raise DslSyntaxError(
                        f"{head.value!r} expects a string literal", tok.line, tok.column
                    )
                parts.append(tok.value)
            elif kind == "int":
                if tok.kind != "int":
                    raise DslSyntaxError(
                        f"{head.value!r} expects an integer literal", tok.line, tok.column
                    )
                parts.append(tok.value)
            elif kind == "class":
                if tok.kind != "sym" or tok.value not in _CLASS_PREDICATES:
                    raise DslSyntaxError(
                        f"unknown character class {tok.value!r}", tok.line, tok.column
                    )
                parts.append(tok.value)
        closing = self._next("')'")
        if closing.kind != ")":
            raise DslSyntaxError(
                f"too many arguments for {head.value!r}", closing.line, closing.column
            )
        return tuple(parts)


def parse_dsl(source: str) -> DslProgram:
    """Parse one s-expression into a program; raise on malformed input."""
    tokens = _tokenize(source)
    parser = _Parser(tokens, source)
    ast = parser.expression()
    trailing = parser._peek()
    if trailing is not None:
        raise DslSyntaxError("trailing content after program", trailing.line, trailing.column)
    return DslProgram(ast)


def print_dsl(ast: tuple) -> str:
    """Emit the canonical text form; ``parse_dsl(print_dsl(t)).ast == t``."""
    op = ast[0]
    parts = [op]
    for kind, arg in zip(_ARITY[op], ast[1:]):
        if kind == "expr":
            parts.append(print_dsl(arg))
        elif kind == "str":
            parts.append(json.dumps(arg, ensure_ascii=False))
        else:
            parts.append(str(arg))
    return "(" + " ".join(parts) + ")"


class _EvalError(Exception):
    pass


def _as_string(value: Value) -> str:
    if not isinstance(value, str):
        raise _EvalError("expected string")
    return value


def _eval(node: tuple, x: Value) -> Value:
    op = node[0]
    if op == "input":
        return x
    if op == "lit":
        return node[1]
    if op == "concat":
        return _as_string(_eval(node[1], x)) + _as_string(_eval(node[2], x))
    if op == "substring":
        s = _as_string(_eval(node[1], x))
        lo, hi = node[2], node[3]
        if not 0 <= lo <= hi <= len(s):
            raise _EvalError("index out of range")
        return s[lo:hi]
    if op == "split_index":
        s = _as_string(_eval(node[1], x))
        sep, k = node[2], node[3]
        if sep == "":
            raise _EvalError("empty separator")
        parts = s.split(sep)
        if not -len(parts) <= k < len(parts):
            raise _EvalError("index out of range")
        return parts[k]
    if op == "replace":
        return _as_string(_eval(node[1], x)).replace(node[2], node[3])
    if op == "upper":
        return _as_string(_eval(node[1], x)).upper()
    if op == "lower":
        return _as_string(_eval(node[1], x)).lower()
    if op == "take_while_class":
        s = _as_string(_eval(node[1], x))
        pred = _CLASS_PREDICATES[node[2]]
        i = 0
        while i < len(s) and pred(s[i]):
            i += 1
        return s[:i]
    if op == "drop_while_class":
        s = _as_string(_eval(node[1], x))
        pred = _CLASS_PREDICATES[node[2]]
        i = 0
        while i < len(s) and pred(s[i]):
            i += 1
        return s[i:]
    if op == "strip":
        return _as_string(_eval(node[1], x)).strip()
    if op == "if_contains":
        s = _as_string(_eval(node[1], x))
        if node[2] in s:
            return _eval(node[3], x)
        return _eval(node[4], x)
    raise _EvalError(f"unknown operator {op!r}")  # unreachable after parse


def eval_dsl(program: DslProgram, x: Value) -> OutputValue:
    """Run a program on one input. Failures are error outputs, never raised."""
    if not (isinstance(x, str) or (isinstance(x, list) and all(isinstance(e, str) for e in x))):
        return OutputValue.error("unsupported input type")
    try:
        return OutputValue.value(_eval(program.ast, x))
    except _EvalError as exc:
        return OutputValue.error(str(exc))
