"""A small arithmetic language for the coefficients ``sigma(t, x)`` and ``U0(x)``.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" INTEGER)?          # not associative
    primary := NUMBER | "t" | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := "sin" | "cos" | "exp" | "abs"

``-x^2`` parses as ``-(x^2)``; ``2^3^2`` is rejected.  Evaluation is
vectorised over numpy arrays.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError

MAX_DEPTH = 64
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
VARIABLES = ("t", "x")
CONSTANTS = {"pi": math.pi}


class ExprSyntaxError(InputError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvaluationError(NumericalError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    child: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)
_START = {"number", "identifier", "'('", "'-'"}


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = []
        pos = 0
        while True:
            m = _TOKEN.match(src, pos)
            if m is None:
                rest = src[pos:]
                if rest.strip() == "":
                    break
                off = pos + len(rest) - len(rest.lstrip())
                raise ExprSyntaxError(f"unexpected character {src[off]!r}", off)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.src))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off, {f"'{op}'"})
        self.take()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprSyntaxError("expression nested too deeply", self.peek()[2])

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected trailing input {text!r}", off, {"operator", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            self.enter()
            node = Unary("neg", self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self):
        base = self.primary()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.take()
            kind, text, off = self.peek()
            if kind != "num":
                raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off, {"integer"})
            if not text.isdigit():
                raise ExprSyntaxError(f"non-integer exponent {text!r}", off, {"integer"})
            self.take()
            node = Binary("^", base, Const(float(int(text))))
            kind, text, off = self.peek()
            if kind == "op" and text == "^":
                raise ExprSyntaxError("'^' is not associative; parenthesize", off)
            return node
        return base

    def primary(self):
        kind, text, off = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            if text in FUNCTIONS:
                self.expect_op("(")
                self.enter()
                node = Unary(text, self.expr())
                self.depth -= 1
                self.expect_op(")")
                return node
            raise UnknownIdentifierError(f"unknown identifier {text!r}", off, set(VARIABLES) | set(FUNCTIONS) | set(CONSTANTS))
        if kind == "op" and text == "(":
            self.enter()
            node = self.expr()
            self.depth -= 1
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off, _START)


def parse(source):
    """Parse ``source`` into an immutable expression tree."""
    if not isinstance(source, str):
        raise InputError("expression source must be text")
    return _Parser(source).parse()


def _eval(node, env):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Unary):
        v = _eval(node.child, env)
        return -v if node.op == "neg" else FUNCTIONS[node.op](v)
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero")
        return a / b
    return a ** int(b)


def evaluate(ast, t=0.0, x=0.0):
    """Evaluate at ``(t, x)``; arrays broadcast.  Non-finite results raise."""
    env = {"t": np.asarray(t, dtype=float), "x": np.asarray(x, dtype=float)}
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(ast, env), dtype=float)
    out = np.broadcast_to(out, np.broadcast_shapes(out.shape, env["t"].shape, env["x"].shape))
    if not np.all(np.isfinite(out)):
        raise EvaluationError("expression evaluated to a non-finite value")
    return out if out.ndim else float(out)


# `eval` is the operation's public name; the builtin stays reachable as builtins.eval.
eval = evaluate  # noqa: A001


def variables(ast):
    """Names of the variables occurring in ``ast``."""
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Const):
        return set()
    if isinstance(ast, Unary):
        return variables(ast.child)
    return variables(ast.left) | variables(ast.right)


def to_source(ast):
    """Render ``ast`` as text that parses back to the same tree."""
    if isinstance(ast, Const):
        if ast.value < 0 or not math.isfinite(ast.value):
            raise InputError(f"constant {ast.value!r} has no source form")
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Unary):
        inner = to_source(ast.child)
        return f"-({inner})" if ast.op == "neg" else f"{ast.op}({inner})"
    if ast.op == "^":
        return f"({to_source(ast.left)})^{int(ast.right.value)}"
    return f"({to_source(ast.left)} {ast.op} {to_source(ast.right)})"
