"""Closed-form scalar coefficient fields on the plane.

Every variable coefficient in this package (elastic moduli, lower-order
terms, manufactured solutions) is a closed-form expression in ``x`` and
``y``.  Text expressions are parsed into an immutable tree that supports
exact symbolic differentiation and vectorised evaluation, so chain-rule
manipulations downstream carry no differencing noise.

Grammar, tightest binding first::

    ^ (right associative)  >  unary -  >  * /  >  + -

with parentheses, the identifiers ``x``, ``y``, ``pi``, and the
one-argument functions ``exp``, ``log``, ``sin``, ``cos``, ``sqrt``.
Derivative trees are not simplified beyond folding of literal subtrees.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FieldError",
    "ParseError",
    "EvalDomainError",
    "ScalarField",
    "parse",
    "evaluate",
    "differentiate",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")
VARIABLES = ("x", "y")


class FieldError(ValueError):
    """Base class for expression-field errors."""


class ParseError(FieldError):
    """Malformed expression text; ``offset`` is the byte position at fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalDomainError(FieldError):
    """Evaluation left the real domain (division by zero, log/sqrt of a
    non-positive argument, non-finite result)."""


# Expression nodes.  Trees are immutable; fields may therefore be shared
# and evaluated concurrently without synchronisation.


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?P<expo>[eE][+-]?\d+)?"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.group("num") is not None:
            tokens.append(("num", m.group("num") + (m.group("expo") or ""), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)
        return self.next()

    def parse(self):
        node = self.sum_()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", off)
        return node

    def sum_(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                node = _bin(val, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                node = _bin(val, node, self.unary())
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return _neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            # right associative; the exponent admits a leading unary minus
            return _bin("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.next()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            if val in VARIABLES:
                return Var(val)
            if val == "pi":
                return Const(np.pi)
            if val in FUNCTIONS:
                self.expect_op("(")
                args = [self.sum_()]
                while self.peek()[:2] == ("op", ","):
                    self.next()
                    args.append(self.sum_())
                self.expect_op(")")
                if len(args) != 1:
                    raise ParseError(f"{val} takes 1 argument, got {len(args)}", off)
                return Call(val, args[0])
            raise ParseError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.sum_()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def _neg(node):
    if isinstance(node, Const):
        return Const(-node.value)
    return Neg(node)


def _bin(op, lhs, rhs):
    # fold literal subtrees; leave the node intact if folding would raise
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        try:
            return Const(_eval_node(Bin(op, lhs, rhs), 0.0, 0.0))
        except EvalDomainError:
            pass
    return Bin(op, lhs, rhs)


def _pow(base, expo):
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    frac = expo != np.floor(expo)
    if np.any((base < 0.0) & frac):
        raise EvalDomainError("negative base raised to a non-integer power")
    if np.any((base == 0.0) & (expo < 0.0)):
        raise EvalDomainError("zero raised to a negative power")
    return np.power(base, expo)


def _eval_node(node, x, y):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x if node.name == "x" else y
    if isinstance(node, Neg):
        return -_eval_node(node.arg, x, y)
    if isinstance(node, Bin):
        a = _eval_node(node.lhs, x, y)
        b = _eval_node(node.rhs, x, y)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0.0):
                raise EvalDomainError("division by zero")
            return a / b
        return _pow(a, b)
    a = _eval_node(node.arg, x, y)
    if node.fn == "exp":
        return np.exp(a)
    if node.fn == "log":
        if np.any(np.asarray(a) <= 0.0):
            raise EvalDomainError("log of a non-positive argument")
        return np.log(a)
    if node.fn == "sin":
        return np.sin(a)
    if node.fn == "cos":
        return np.cos(a)
    if np.any(np.asarray(a) < 0.0):
        raise EvalDomainError("sqrt of a negative argument")
    return np.sqrt(a)


def _diff_node(node, var):
    if isinstance(node, (Const,)):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return _neg(_diff_node(node.arg, var))
    if isinstance(node, Bin):
        u, v = node.lhs, node.rhs
        du, dv = _diff_node(u, var), _diff_node(v, var)
        if node.op in "+-":
            return _bin(node.op, du, dv)
        if node.op == "*":
            return _bin("+", _bin("*", du, v), _bin("*", u, dv))
        if node.op == "/":
            num = _bin("-", _bin("*", du, v), _bin("*", u, dv))
            return _bin("/", num, _bin("*", v, v))
        # power: literal exponents get the plain power rule (valid for
        # negative bases); general exponents go through exp/log
        if isinstance(v, Const):
            c = v.value
            return _bin("*", _bin("*", Const(c), _bin("^", u, Const(c - 1.0))), du)
        term1 = _bin("*", dv, Call("log", u))
        term2 = _bin("/", _bin("*", v, du), u)
        return _bin("*", node, _bin("+", term1, term2))
    a, da = node.arg, _diff_node(node.arg, var)
    if node.fn == "exp":
        return _bin("*", node, da)
    if node.fn == "log":
        return _bin("/", da, a)
    if node.fn == "sin":
        return _bin("*", Call("cos", a), da)
    if node.fn == "cos":
        return _neg(_bin("*", Call("sin", a), da))
    return _bin("/", da, _bin("*", Const(2.0), node))


def _format(node):
    # parenthesise conservatively; output re-parses to the same tree shape
    if isinstance(node, Const):
        v = node.value
        if v == int(v) and abs(v) < 1e16:
            text = str(int(v))
        else:
            text = repr(v)
        return f"({text})" if v < 0 else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_format(node.arg)})"
    if isinstance(node, Bin):
        return f"({_format(node.lhs)} {node.op} {_format(node.rhs)})"
    return f"{node.fn}({_format(node.arg)})"


class ScalarField:
    """Immutable scalar function of ``(x, y)`` backed by an expression tree.

    Construct with :func:`parse`, :meth:`ScalarField.constant`, or by
    arithmetic on existing fields.  Evaluation is deterministic IEEE
    double arithmetic and accepts scalars or broadcastable arrays.
    """

    __slots__ = ("ast", "source")

    def __init__(self, ast, source=None):
        object.__setattr__(self, "ast", ast)
        object.__setattr__(self, "source", source if source is not None else _format(ast))

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    def __repr__(self):
        return f"ScalarField({self.source!r})"

    @classmethod
    def constant(cls, value):
        return cls(Const(float(value)), source=repr(float(value)))

    def __call__(self, x, y):
        return evaluate(self, x, y)

    def diff(self, var):
        return differentiate(self, var)

    def is_zero(self):
        """True when the tree is the literal constant 0 (no analysis)."""
        return isinstance(self.ast, Const) and self.ast.value == 0.0

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            return other
        return ScalarField.constant(other)

    def __add__(self, other):
        return ScalarField(_bin("+", self.ast, self._coerce(other).ast))

    def __radd__(self, other):
        return self._coerce(other).__add__(self)

    def __sub__(self, other):
        return ScalarField(_bin("-", self.ast, self._coerce(other).ast))

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        return ScalarField(_bin("*", self.ast, self._coerce(other).ast))

    def __rmul__(self, other):
        return self._coerce(other).__mul__(self)

    def __truediv__(self, other):
        return ScalarField(_bin("/", self.ast, self._coerce(other).ast))

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return ScalarField(_neg(self.ast))


def parse(text):
    """Parse expression text into a :class:`ScalarField`.

    Raises :class:`ParseError` (with byte offset) on malformed input,
    unknown identifiers, or wrong function arity.
    """
    if not isinstance(text, str):
        raise ParseError("expression must be a string", 0)
    if not text.strip():
        raise ParseError("empty expression", 0)
    return ScalarField(_Parser(text).parse(), source=text)


def evaluate(field, x, y):
    """Evaluate ``field`` at ``(x, y)``; scalars in, float out.

    Array inputs broadcast elementwise.  Domain violations raise
    :class:`EvalDomainError` instead of returning NaN/Inf.
    """
    scalar = np.isscalar(x) and np.isscalar(y)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _eval_node(field.ast, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.asarray(out, dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvalDomainError(f"non-finite value in {field.source!r}")
    if scalar:
        return float(out)
    return np.broadcast_to(out, np.broadcast_shapes(np.shape(x), np.shape(y))).copy() \
        if out.shape != np.broadcast_shapes(np.shape(x), np.shape(y)) else out


def differentiate(field, var):
    """Exact symbolic partial derivative with respect to ``"x"`` or ``"y"``."""
    if var not in VARIABLES:
        raise ValueError(f"var must be 'x' or 'y', got {var!r}")
    return ScalarField(_diff_node(field.ast, var))
