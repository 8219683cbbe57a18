"""A small total arithmetic language for real-vector self-maps.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | VAR | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``x1`` .. ``xm``.  Functions: min, max (two arguments) and
abs, sqrt, exp, sin, cos (one argument).
"""

from dataclasses import dataclass
import math
import re

import numpy as np

from .errors import (
    InvalidInput,
    MapEvalError,
    ParseError,
    UnknownIdentifier,
    VariableOutOfRange,
)
from .rng import SplitMix64, derive_seed
from .space import norm


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


FUNCTIONS = {
    "min": (2, min),
    "max": (2, max),
    "abs": (1, abs),
    "sqrt": (1, math.sqrt),
    "exp": (1, math.exp),
    "sin": (1, math.sin),
    "cos": (1, math.cos),
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"x([1-9][0-9]*)")


class _Parser:
    def __init__(self, text, dimension):
        self.text = text
        self.dimension = dimension
        self.tokens = self._lex()
        self.i = 0

    def _byte(self, pos):
        return len(self.text[:pos].encode("utf-8"))

    def error(self, pos, expectation, cls=ParseError, message=None):
        return cls(self._byte(pos), expectation, message)

    def _lex(self):
        out = []
        pos = 0
        text = self.text
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise self.error(pos, "number, name, operator or parenthesis")
            kind = m.lastgroup
            if kind != "ws":
                out.append((kind, m.group(), pos))
            pos = m.end()
        out.append(("end", "", len(text)))
        return out

    @property
    def tok(self):
        return self.tokens[self.i]

    def accept(self, *ops):
        kind, value, _ = self.tok
        if kind == "op" and value in ops:
            self.i += 1
            return value
        return None

    def expect(self, op):
        if self.accept(op) is None:
            raise self.error(self.tok[2], f"'{op}'")

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            raise self.error(self.tok[2], "operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while True:
            op = self.accept("+", "-")
            if op is None:
                return node
            node = BinOp(op, node, self.term())

    def term(self):
        node = self.unary()
        while True:
            op = self.accept("*", "/")
            if op is None:
                return node
            node = BinOp(op, node, self.unary())

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            v = float(value)
            if not math.isfinite(v):
                raise self.error(pos, "finite number literal")
            return Const(v)
        if kind == "name":
            self.i += 1
            if self.tok[0] == "op" and self.tok[1] == "(":
                return self.call(value, pos)
            m = _VAR.fullmatch(value)
            if m is None:
                raise self.error(pos, "variable x1..xm or function", UnknownIdentifier,
                                 f"unknown identifier {value!r} at byte {self._byte(pos)}")
            index = int(m.group(1))
            if index > self.dimension:
                raise self.error(pos, f"variable index <= {self.dimension}", VariableOutOfRange,
                                 f"{value} exceeds dimension {self.dimension}")
            return Var(index)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(pos, "number, variable, function call or '('")

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise self.error(pos, "known function name", UnknownIdentifier,
                             f"unknown function {name!r} at byte {self._byte(pos)}")
        arity = FUNCTIONS[name][0]
        self.expect("(")
        args = [self.expr()]
        while len(args) < arity:
            self.expect(",")
            args.append(self.expr())
        self.expect(")")
        return Call(name, tuple(args))


def parse_expr(text, dimension):
    return _Parser(text, dimension).parse()


def serialize(node):
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{serialize(node.operand)})"
    if isinstance(node, BinOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(serialize(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


class _Fault(Exception):
    pass


def _finite(v):
    if not math.isfinite(v):
        raise _Fault("non-finite value")
    return v


def evaluate(node, x):
    """Evaluate a tree at x (0-based sequence; Var(i) reads x[i-1])."""
    try:
        return _eval(node, x)
    except _Fault as exc:
        raise MapEvalError(str(exc)) from None


def _eval(node, x):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return _finite(float(x[node.index - 1]))
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, BinOp):
        a = _eval(node.left, x)
        b = _eval(node.right, x)
        op = node.op
        if op == "+":
            return _finite(a + b)
        if op == "-":
            return _finite(a - b)
        if op == "*":
            return _finite(a * b)
        if op == "/":
            if b == 0.0:
                raise _Fault("division by zero")
            return _finite(a / b)
        try:
            return _finite(math.pow(a, b))
        except (ValueError, OverflowError, ZeroDivisionError):
            raise _Fault(f"pow({a!r}, {b!r}) undefined") from None
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][1]
        args = [_eval(a, x) for a in node.args]
        if node.name == "sqrt" and args[0] < 0.0:
            raise _Fault("sqrt of negative number")
        try:
            return _finite(fn(*args))
        except (ValueError, OverflowError):
            raise _Fault(f"{node.name} undefined at {args}") from None
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class RealMap:
    dimension: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.dimension:
            raise InvalidInput(
                f"{len(self.components)} components for dimension {self.dimension}"
            )

    @classmethod
    def from_strings(cls, texts):
        texts = list(texts)
        return cls(len(texts), tuple(parse_expr(t, len(texts)) for t in texts))

    def to_strings(self):
        return [serialize(c) for c in self.components]

    def __call__(self, point):
        return np.array(eval_map(self, point))


def parse_map(texts):
    return RealMap.from_strings(texts)


def eval_map(fmap, point):
    x = [float(v) for v in np.ravel(point)]
    if len(x) != fmap.dimension:
        raise InvalidInput(f"point has dimension {len(x)}, map expects {fmap.dimension}")
    out = []
    for c, node in enumerate(fmap.components):
        try:
            out.append(_eval(node, x))
        except _Fault as exc:
            raise MapEvalError(f"component {c + 1}: {exc}", component=c) from None
    return tuple(out)


def lipschitz_probe(fmap, box, samples, seed, norm_kind="l2"):
    """Largest sampled |f(x)-f(y)| / |x-y|; a lower bound on the true constant."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if samples < 2:
        raise ValueError("samples must be >= 2")
    best = 0.0
    for i in range(samples):
        rng = SplitMix64(derive_seed(seed, i))
        x = np.array([rng.uniform(lo, hi) for lo, hi in box])
        y = np.array([rng.uniform(lo, hi) for lo, hi in box])
        d = norm(x - y, norm_kind)
        if d == 0.0:
            continue
        fx = np.array(eval_map(fmap, x))
        fy = np.array(eval_map(fmap, y))
        best = max(best, norm(fx - fy, norm_kind) / d)
    return best
