"""A small deterministic expression language for problem definitions.

All scalar functions of a problem (kernel K(t,s), source f(t), load
coefficients a(t), integral weights m(s)) are written in this language.

Grammar (LL(1), whitespace-insensitive, no implicit multiplication):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | CONST | VAR | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := "sin" | "cos" | "exp" | "log" | "sqrt" | "abs"
    CONST  := "pi" | "e"

"^" binds tightest and unary minus binds looser than "^", so -2^2 = -4
and 2^3^2 = 512. Evaluation is plain IEEE double precision; the evaluator
accepts numpy arrays in the bindings and broadcasts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import DomainEvalError, ExprSyntaxError, UndefinedVariableError

__all__ = ["Expr", "parse", "evaluate", "unparse"]

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
_CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expr:
    """An immutable parsed expression; safe to share between threads."""

    root: Node
    variables: frozenset[str]
    text: str

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return unparse(self.root)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", at)
        if m.lastgroup is not None:
            tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed_vars: frozenset[str]):
        self.text = text
        self.allowed = allowed_vars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected '{op}'", pos)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in _CONSTANTS:
                return Num(_CONSTANTS[val])
            if val in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            if val in self.allowed:
                return Var(val)
            raise UndefinedVariableError(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse(text: str, allowed_vars: Iterable[str] = ("t",)) -> Expr:
    """Parse `text` into an Expr whose variables must come from `allowed_vars`.

    Raises ExprSyntaxError (with position) on malformed input and
    UndefinedVariableError for variables outside the declared set.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    allowed = frozenset(allowed_vars)
    root = _Parser(text, allowed).parse()
    return Expr(root=root, variables=_collect_vars(root), text=text)


def _collect_vars(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Neg):
        return _collect_vars(node.operand)
    if isinstance(node, BinOp):
        return _collect_vars(node.left) | _collect_vars(node.right)
    if isinstance(node, Call):
        return _collect_vars(node.arg)
    return frozenset()


def _check_finite(value, node: Node):
    if not np.all(np.isfinite(value)):
        text = unparse(node)
        raise DomainEvalError(f"non-finite value from '{text}'", text)
    return value


def _eval_node(node: Node, bindings: Mapping[str, object]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return bindings[node.name]
        except KeyError:
            raise DomainEvalError(f"no binding for variable '{node.name}'", node.name)
    if isinstance(node, Neg):
        return -_eval_node(node.operand, bindings)
    if isinstance(node, Call):
        arg = _eval_node(node.arg, bindings)
        return _check_finite(_FUNCTIONS[node.func](arg), node)
    left = _eval_node(node.left, bindings)
    right = _eval_node(node.right, bindings)
    if node.op == "+":
        value = np.add(left, right)
    elif node.op == "-":
        value = np.subtract(left, right)
    elif node.op == "*":
        value = np.multiply(left, right)
    elif node.op == "/":
        value = np.divide(left, right)
    else:
        value = np.power(left, right)
    return _check_finite(value, node)


def evaluate(expr: Expr, bindings: Mapping[str, object]):
    """Evaluate `expr` at the given variable bindings.

    Bindings may be floats or numpy arrays (broadcast elementwise). A scalar
    result is returned as float. Non-finite intermediate results raise
    DomainEvalError naming the offending subexpression.
    """
    missing = expr.variables - set(bindings)
    if missing:
        name = sorted(missing)[0]
        raise DomainEvalError(f"no binding for variable '{name}'", name)
    coerced = {
        k: float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)
        for k, v in bindings.items()
    }
    with np.errstate(all="ignore"):
        value = _check_finite(_eval_node(expr.root, coerced), expr.root)
    if np.ndim(value) == 0:
        return float(value)
    return np.asarray(value, dtype=float)


def unparse(node: Node) -> str:
    """Render a node back to parseable text (fully parenthesized)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{unparse(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
