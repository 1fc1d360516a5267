"""Expressions in one real variable ``x``.

A tiny arithmetic language for generating functions::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?          # exponent must not contain x
    atom  := NUMBER | 'x' | NAME '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Trees are
immutable; :func:`differentiate` is exact and :func:`taylor` gives truncated
Taylor coefficients by series arithmetic (used to resolve removable
singularities without differencing).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownFunction

FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh", "tanh", "sqrt", "ln")
BINARY_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


class Expr:
    """Base node.  Supports ``+ - * / **`` with numbers and other nodes."""

    __slots__ = ()

    def __add__(self, other):
        return Binary("add", self, _coerce(other))

    def __radd__(self, other):
        return Binary("add", _coerce(other), self)

    def __sub__(self, other):
        return Binary("sub", self, _coerce(other))

    def __rsub__(self, other):
        return Binary("sub", _coerce(other), self)

    def __mul__(self, other):
        return Binary("mul", self, _coerce(other))

    def __rmul__(self, other):
        return Binary("mul", _coerce(other), self)

    def __truediv__(self, other):
        return Binary("div", self, _coerce(other))

    def __rtruediv__(self, other):
        return Binary("div", _coerce(other), self)

    def __neg__(self):
        return Unary("neg", self)

    def __pow__(self, p):
        return Pow(self, float(p))

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def depends_on_x(self) -> bool:
        return any(child.depends_on_x for child in self.children)

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite constant {self.value!r}")

    def __str__(self):
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 or text.startswith("-") else text


@dataclass(frozen=True, slots=True)
class Var(Expr):
    @property
    def depends_on_x(self) -> bool:
        return True

    def __str__(self):
        return "x"


@dataclass(frozen=True, slots=True)
class Unary(Expr):
    op: str
    arg: Expr

    def __post_init__(self):
        if self.op != "neg" and self.op not in FUNCTIONS:
            raise ValueError(f"unknown unary op {self.op!r}")

    @property
    def children(self):
        return (self.arg,)

    def __str__(self):
        if self.op == "neg":
            return f"(-{self.arg})"
        return f"{self.op}({self.arg})"


@dataclass(frozen=True, slots=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary op {self.op!r}")

    @property
    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left} {BINARY_OPS[self.op]} {self.right})"


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: float

    def __post_init__(self):
        if not math.isfinite(self.exponent):
            raise ValueError("non-finite exponent")

    @property
    def children(self):
        return (self.base,)

    def __str__(self):
        return f"({self.base})^{Const(self.exponent)}"


X = Var()


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(float(value))


def func(name: str, arg) -> Expr:
    return Unary(name, _coerce(arg))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            if source[pos:].strip() == "":
                break
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == pos:
                bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
                raise ExprSyntaxError(
                    f"unexpected character {source[bad]!r}", source, self._offset(bad)
                )
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), self._offset(m.start(kind))))
            pos = m.end()
        self.end_offset = self._offset(len(source.rstrip()))
        self.i = 0

    def _offset(self, char_index: int) -> int:
        return len(self.source[:char_index].encode("utf-8")) + 1

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", self.end_offset)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.peek()
        if value != text or kind != "op":
            found = "end of input" if kind == "eof" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.source, offset)
        self.i += 1

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"expected end of input, found {value!r}", self.source, offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return Unary("neg", self.unary())
        if kind == "op" and value == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.take()
            offset = self.peek()[2]
            exponent = self.unary()
            if exponent.depends_on_x:
                raise ExprSyntaxError("exponent must be a constant", self.source, offset)
            try:
                p = float(evaluate(exponent, 0.0))
            except (DomainError, OverflowError) as exc:
                raise ExprSyntaxError(f"bad exponent ({exc})", self.source, offset) from None
            return Pow(base, p)
        return base

    def atom(self) -> Expr:
        kind, value, offset = self.take()
        if kind == "num":
            v = float(value)
            if not math.isfinite(v):
                raise ExprSyntaxError("number out of range", self.source, offset)
            return Const(v)
        if kind == "name":
            if value == "x":
                return X
            if value not in FUNCTIONS:
                raise UnknownFunction(f"unknown function {value!r}", self.source, offset)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Unary(value, arg)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(value)
        raise ExprSyntaxError(f"expected a number, 'x', a function or '(', found {found}",
                              self.source, offset)


def parse(source: str) -> Expr:
    """Parse DSL text into an expression tree."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# differentiation


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold(value: float, fallback: Expr) -> Expr:
    return Const(value) if math.isfinite(value) else fallback


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return _fold(a.value + b.value, Binary("add", a, b))
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return _fold(a.value - b.value, Binary("sub", a, b))
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return _fold(a.value * b.value, Binary("mul", a, b))
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def power(a: Expr, p: float) -> Expr:
    if p == 0.0:
        return Const(1.0)
    if p == 1.0:
        return a
    return Pow(a, p)


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to x (unsimplified beyond constant folding)."""
    match e:
        case Const():
            return Const(0.0)
        case Var():
            return Const(1.0)
        case Binary(op="add", left=a, right=b):
            return add(differentiate(a), differentiate(b))
        case Binary(op="sub", left=a, right=b):
            return sub(differentiate(a), differentiate(b))
        case Binary(op="mul", left=a, right=b):
            return add(mul(differentiate(a), b), mul(a, differentiate(b)))
        case Binary(op="div", left=a, right=b):
            da, db = differentiate(a), differentiate(b)
            if _is_const(db, 0.0):
                return div(da, b)
            return div(sub(mul(da, b), mul(a, db)), power(b, 2.0))
        case Pow(base=a, exponent=p):
            return mul(mul(Const(p), power(a, p - 1.0)), differentiate(a))
        case Unary(op="neg", arg=a):
            return neg(differentiate(a))
        case Unary(op=op, arg=a):
            da = differentiate(a)
            if _is_const(da, 0.0):
                return Const(0.0)
            if op == "exp":
                outer = e
            elif op == "sin":
                outer = Unary("cos", a)
            elif op == "cos":
                outer = neg(Unary("sin", a))
            elif op == "sinh":
                outer = Unary("cosh", a)
            elif op == "cosh":
                outer = Unary("sinh", a)
            elif op == "tanh":
                outer = sub(Const(1.0), power(e, 2.0))
            elif op == "sqrt":
                outer = div(Const(0.5), e)
            else:
                outer = div(Const(1.0), a)
            return mul(outer, da)
    raise TypeError(f"not an expression node: {e!r}")


def derivatives(e: Expr, order: int) -> list[Expr]:
    """``[e, e', e'', ...]`` up to the requested order."""
    out = [e]
    for _ in range(order):
        out.append(differentiate(out[-1]))
    return out


# ---------------------------------------------------------------------------
# evaluation


def _check(values: np.ndarray, what: str) -> np.ndarray:
    if np.isnan(values).any():
        raise DomainError(f"{what} is undefined at some points")
    if np.isinf(values).any():
        raise OverflowError(f"{what} overflows at some points")
    return values


def _eval(e: Expr, x: np.ndarray) -> np.ndarray:
    match e:
        case Const(value=v):
            return np.full_like(x, v)
        case Var():
            return x
        case Binary(op=op, left=a, right=b):
            u, v = _eval(a, x), _eval(b, x)
            if op == "add":
                r = u + v
            elif op == "sub":
                r = u - v
            elif op == "mul":
                r = u * v
            else:
                if (v == 0.0).any():
                    raise DomainError(f"division by zero in {e}")
                r = u / v
            return _check(r, str(e))
        case Pow(base=a, exponent=p):
            u = _eval(a, x)
            if p != int(p) and (u < 0).any():
                raise DomainError(f"negative base with non-integer exponent in {e}")
            if p < 0 and (u == 0).any():
                raise DomainError(f"zero to a negative power in {e}")
            return _check(np.power(u, p), str(e))
        case Unary(op=op, arg=a):
            u = _eval(a, x)
            if op == "neg":
                return -u
            if op == "ln" and (u <= 0).any():
                raise DomainError(f"ln of a non-positive value in {e}")
            if op == "sqrt" and (u < 0).any():
                raise DomainError(f"sqrt of a negative value in {e}")
            fn = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sinh": np.sinh,
                  "cosh": np.cosh, "tanh": np.tanh, "sqrt": np.sqrt, "ln": np.log}[op]
            return _check(fn(u), str(e))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, x):
    """Evaluate at a float or an array of floats.

    Raises :class:`DomainError` outside the domain and :class:`OverflowError`
    when an intermediate value is not representable.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise DomainError("x must be finite")
    with np.errstate(all="ignore"):
        out = _eval(e, arr)
    if np.ndim(x) == 0:
        return float(out)
    return np.array(out, dtype=np.float64, copy=True)


# ---------------------------------------------------------------------------
# truncated Taylor series


def _series_mul(a, b):
    return np.convolve(a, b)[: len(a)]


def _series_div(a, b):
    if b[0] == 0.0:
        raise DomainError("series division by a vanishing leading coefficient")
    c = np.zeros_like(a)
    c[0] = a[0] / b[0]
    for k in range(1, len(a)):
        c[k] = (a[k] - np.dot(b[1 : k + 1], c[k - 1 :: -1])) / b[0]
    return c


def _series_exp(u):
    e = np.zeros_like(u)
    e[0] = math.exp(u[0])
    for k in range(1, len(u)):
        j = np.arange(1, k + 1)
        e[k] = np.dot(j * u[1 : k + 1], e[k - 1 :: -1]) / k
    return e


def _series_sincos(u, hyperbolic: bool):
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    if hyperbolic:
        s[0], c[0] = math.sinh(u[0]), math.cosh(u[0])
    else:
        s[0], c[0] = math.sin(u[0]), math.cos(u[0])
    sign = 1.0 if hyperbolic else -1.0
    for k in range(1, len(u)):
        ju = np.arange(1, k + 1) * u[1 : k + 1]
        s[k] = np.dot(ju, c[k - 1 :: -1]) / k
        c[k] = sign * np.dot(ju, s[k - 1 :: -1]) / k
    return s, c


def _series_sqrt(u):
    if u[0] <= 0.0:
        raise DomainError("sqrt series at a non-positive point")
    r = np.zeros_like(u)
    r[0] = math.sqrt(u[0])
    for k in range(1, len(u)):
        r[k] = (u[k] - np.dot(r[1:k], r[k - 1 : 0 : -1])) / (2.0 * r[0])
    return r


def _series_ln(u):
    if u[0] <= 0.0:
        raise DomainError("ln series at a non-positive point")
    l = np.zeros_like(u)
    l[0] = math.log(u[0])
    for k in range(1, len(u)):
        j = np.arange(1, k)
        l[k] = (k * u[k] - np.dot(j * l[1:k], u[k - 1 : 0 : -1])) / (k * u[0])
    return l


def _series_pow(u, p):
    if p == int(p) and p >= 0:
        out = np.zeros_like(u)
        out[0] = 1.0
        base, n = u.copy(), int(p)
        while n:
            if n & 1:
                out = _series_mul(out, base)
            base = _series_mul(base, base)
            n >>= 1
        return out
    if u[0] == 0.0 or (u[0] < 0 and p != int(p)):
        raise DomainError("power series at a singular point")
    y = np.zeros_like(u)
    y[0] = u[0] ** p
    for k in range(1, len(u)):
        j = np.arange(1, k + 1)
        y[k] = np.dot((p * j - (k - j)) * u[1 : k + 1], y[k - 1 :: -1]) / (k * u[0])
    return y


def _series(e: Expr, x0: float, n: int) -> np.ndarray:
    match e:
        case Const(value=v):
            s = np.zeros(n)
            s[0] = v
            return s
        case Var():
            s = np.zeros(n)
            s[0] = x0
            if n > 1:
                s[1] = 1.0
            return s
        case Binary(op=op, left=a, right=b):
            u, v = _series(a, x0, n), _series(b, x0, n)
            if op == "add":
                return u + v
            if op == "sub":
                return u - v
            if op == "mul":
                return _series_mul(u, v)
            return _series_div(u, v)
        case Pow(base=a, exponent=p):
            return _series_pow(_series(a, x0, n), p)
        case Unary(op=op, arg=a):
            u = _series(a, x0, n)
            if op == "neg":
                return -u
            if op == "exp":
                return _series_exp(u)
            if op in ("sin", "cos"):
                s, c = _series_sincos(u, hyperbolic=False)
                return s if op == "sin" else c
            if op in ("sinh", "cosh", "tanh"):
                s, c = _series_sincos(u, hyperbolic=True)
                if op == "tanh":
                    return _series_div(s, c)
                return s if op == "sinh" else c
            if op == "sqrt":
                return _series_sqrt(u)
            return _series_ln(u)
    raise TypeError(f"not an expression node: {e!r}")


def taylor(e: Expr, x0: float, order: int) -> np.ndarray:
    """Coefficients ``c[k] = e^(k)(x0) / k!`` for ``k = 0..order``."""
    with np.errstate(all="ignore"):
        try:
            c = _series(e, float(x0), order + 1)
        except (OverflowError, ValueError) as exc:
            raise DomainError(str(exc)) from None
    if not np.isfinite(c).all():
        raise OverflowError(f"Taylor coefficients of {e} at {x0} are not finite")
    return c


def derivative_at(e: Expr, x0: float, k: int) -> float:
    """k-th derivative via Taylor arithmetic (independent of :func:`differentiate`)."""
    return float(taylor(e, x0, k)[k] * factorial(k))
