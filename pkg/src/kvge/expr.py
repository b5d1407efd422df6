"""Arithmetic mini-language for user-defined coefficients.

Grammar: number literals, constants (pi, e), declared variables, unary
minus, binary + - * / ^ (^ right-associative and tighter than unary
minus's operand chain), and calls to sin, cos, tan, exp, ln, sqrt, abs,
min, max, pow.  Implicit multiplication is a syntax error.  Evaluation is
IEEE double precision and either returns finite values or raises a domain
error; it never leaks NaN/inf.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import (
    EvalDomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownIdentifierError,
)

CONSTANTS = {"pi": np.pi, "e": np.e}
FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "ln": 1,
    "sqrt": 1, "abs": 1, "min": 2, "max": 2, "pow": 2,
}

_ADD_BP = 10
_MUL_BP = 20
_UNARY_BP = 25
_POW_BP = 30


# --- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


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
    args: tuple


Node = Union[Num, Const, Var, Neg, BinOp, Call]


# --- lexer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            # skip over whitespace-only tail
            rest = source[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character '{source[bad]}'", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


# --- parser ------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]):
        self.source = source
        self.allowed = allowed_vars
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        kind, val, off = self.tok
        if kind != "op" or val != text:
            raise ExprSyntaxError(f"expected '{text}', found '{val or 'end of input'}'", off)
        self.advance()

    def _lbp(self, tok) -> int:
        kind, val, _ = tok
        if kind != "op":
            return 0
        return {"+": _ADD_BP, "-": _ADD_BP, "*": _MUL_BP, "/": _MUL_BP, "^": _POW_BP}.get(val, 0)

    def parse_expression(self, rbp: int = 0) -> Node:
        left = self._nud(self.advance())
        while rbp < self._lbp(self.tok):
            left = self._led(self.advance(), left)
        return left

    def _nud(self, tok) -> Node:
        kind, val, off = tok
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in FUNCTIONS:
                return self._call(val, off)
            if val in CONSTANTS:
                return Const(val)
            if val in self.allowed:
                return Var(val)
            raise UnknownIdentifierError(val, off)
        if kind == "op" and val == "(":
            inner = self.parse_expression(0)
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            return Neg(self.parse_expression(_UNARY_BP))
        raise ExprSyntaxError(f"unexpected token '{val or 'end of input'}'", off)

    def _led(self, tok, left: Node) -> Node:
        _, val, _ = tok
        if val == "^":
            # right-associative
            return BinOp("^", left, self.parse_expression(_POW_BP - 1))
        return BinOp(val, left, self.parse_expression(self._lbp(tok)))

    def _call(self, name: str, off: int) -> Node:
        kind, val, o2 = self.tok
        if kind != "op" or val != "(":
            raise ExprSyntaxError(f"function '{name}' must be called with '('", o2)
        self.advance()
        args = [self.parse_expression(0)]
        while self.tok[:2] == ("op", ","):
            self.advance()
            args.append(self.parse_expression(0))
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExprSyntaxError(
                f"function '{name}' takes {FUNCTIONS[name]} argument(s), got {len(args)}", off
            )
        return Call(name, tuple(args))


# --- printer -----------------------------------------------------------

def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return {"+": _ADD_BP, "-": _ADD_BP, "*": _MUL_BP, "/": _MUL_BP, "^": _POW_BP}[node.op]
    if isinstance(node, Neg):
        return _UNARY_BP
    return 100


def to_source(node: Node) -> str:
    """Render an AST back to source; parse(to_source(a)) reproduces a."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if _prec(node.operand) < _UNARY_BP:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, BinOp):
        p = _prec(node)
        left = to_source(node.left)
        right = to_source(node.right)
        if node.op == "^":
            # right-associative: parenthesize left at equal precedence
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < p:
                right = f"({right})"
        else:
            if _prec(node.left) < p:
                left = f"({left})"
            # -, / are non-associative on the right; +, * keep structure too
            if _prec(node.right) <= p:
                right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an AST node: {node!r}")


# --- evaluation --------------------------------------------------------

def _quiet():
    return np.errstate(over="ignore", invalid="ignore", divide="ignore")


def _check_finite(value, node: Node):
    if not np.all(np.isfinite(value)):
        raise EvalDomainError("non-finite result", to_source(node))
    return value


def _eval_node(node: Node, bindings: Mapping[str, object]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            return bindings[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable '{node.name}' is unbound") from None
    if isinstance(node, Neg):
        return -np.asarray(_eval_node(node.operand, bindings), dtype=float)
    if isinstance(node, BinOp):
        a = np.asarray(_eval_node(node.left, bindings), dtype=float)
        b = np.asarray(_eval_node(node.right, bindings), dtype=float)
        if node.op == "+":
            return _check_finite(a + b, node)
        if node.op == "-":
            return _check_finite(a - b, node)
        if node.op == "*":
            return _check_finite(a * b, node)
        if node.op == "/":
            if np.any(b == 0.0):
                raise EvalDomainError("division by zero", to_source(node))
            return _check_finite(a / b, node)
        # '^'
        if np.any((a < 0.0) & ~np.equal(np.mod(b, 1.0), 0.0)):
            raise EvalDomainError("negative base with non-integer exponent", to_source(node))
        if np.any((a == 0.0) & (b < 0.0)):
            raise EvalDomainError("zero raised to a negative power", to_source(node))
        with _quiet():
            return _check_finite(np.power(a, b), node)
    if isinstance(node, Call):
        args = [np.asarray(_eval_node(a, bindings), dtype=float) for a in node.args]
        f = node.func
        if f == "ln":
            if np.any(args[0] <= 0.0):
                raise EvalDomainError("ln of a non-positive value", to_source(node))
            return _check_finite(np.log(args[0]), node)
        if f == "sqrt":
            if np.any(args[0] < 0.0):
                raise EvalDomainError("sqrt of a negative value", to_source(node))
            return np.sqrt(args[0])
        if f == "pow":
            return _eval_node(BinOp("^", node.args[0], node.args[1]), bindings)
        if f == "min":
            return np.minimum(args[0], args[1])
        if f == "max":
            return np.maximum(args[0], args[1])
        fn = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "abs": np.abs}[f]
        with _quiet():
            return _check_finite(fn(args[0]), node)
    raise TypeError(f"not an AST node: {node!r}")


# --- public interface ----------------------------------------------------

@dataclass(frozen=True)
class Expression:
    """A parsed, immutable expression; evaluation is pure and re-entrant."""

    source: str
    ast: Node
    variables: frozenset[str] = field(default_factory=frozenset)

    def eval(self, bindings: Mapping[str, object] | None = None):
        """Evaluate with the given variable bindings.

        Scalar bindings give a float; numpy-array bindings broadcast and
        give an ndarray (constant expressions are broadcast to the binding
        shape).  Raises EvalDomainError instead of returning NaN or inf.
        """
        bindings = bindings or {}
        out = _eval_node(self.ast, bindings)
        shape = np.broadcast_shapes(*(np.shape(v) for v in bindings.values())) \
            if bindings else ()
        if np.isscalar(out) or (isinstance(out, np.ndarray) and out.ndim == 0):
            out = float(out)
            if not np.isfinite(out):
                raise EvalDomainError("non-finite result", self.source)
            return np.full(shape, out) if shape else out
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() \
            if np.shape(out) != shape else np.asarray(out, dtype=float)

    def __call__(self, **bindings):
        return self.eval(bindings)

    def pretty(self) -> str:
        return to_source(self.ast)


def parse(source: str, allowed_vars=()) -> Expression:
    """Parse `source` into an Expression using only `allowed_vars`."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(source, frozenset(allowed_vars))
    ast = parser.parse_expression(0)
    kind, val, off = parser.tok
    if kind != "end":
        raise ExprSyntaxError(f"unexpected token '{val}' after expression", off)
    return Expression(source=source, ast=ast, variables=_free_vars(ast))


def _free_vars(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return _free_vars(node.operand)
    if isinstance(node, BinOp):
        return _free_vars(node.left) | _free_vars(node.right)
    if isinstance(node, Call):
        out: frozenset[str] = frozenset()
        for a in node.args:
            out |= _free_vars(a)
        return out
    return frozenset()
