"""Symbolic expressions of one real variable with complex values.

Everything downstream (superpotentials, masses, potentials, log-derivatives)
is built on this small AST: parse text, differentiate exactly, evaluate at
double precision.  Trees are immutable and hashable, so they can be shared
freely between threads and cached without copying.

Grammar accepted by :func:`parse` (whitespace is ignored)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | atom ("^" factor)?
    atom   := number | "x" | "i" | "pi" | identifier
            | func "(" expr ")" | "(" expr ")"
    func   := sin | cos | tan | sec | exp | log | sqrt | sinh | cosh | tanh

"^" is right-associative and binds tighter than unary minus, so "-x^2"
means -(x^2) and "x^-2" is accepted.  Numbers may use scientific notation.
Any identifier other than "x", "i", "pi" and the function names is a free
parameter to be bound at evaluation time.

Construction applies only safe local simplifications (constant folding,
0*f -> 0, f^1 -> f, f^2 -> f*f, double negation); no aggressive rewriting,
so differentiation output stays predictable.

Parity/conjugation images (see model.pt_image) may contain an internal
conjugation node printed as "conj(...)"; it is not part of the input
grammar and such trees are not meant to be re-parsed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Param", "Neg", "Conj",
    "Add", "Sub", "Mul", "Div", "Pow", "Func",
    "ParamEnv", "ExprError", "ParseError", "EvaluationError",
    "UnboundParameterError", "PoleError",
    "parse", "differentiate", "evaluate", "evaluate_many", "substitute_x",
    "const", "add", "sub", "mul", "div", "pow_", "neg", "conj_expr", "func",
    "X", "IMAG", "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "tan", "sec", "exp", "log", "sqrt",
             "sinh", "cosh", "tanh")

# Denominators (and cos under sec/tan) smaller than this are treated as a
# pole hit even though the floating-point value is still finite.
POLE_TOLERANCE = 1e-13

Number = Union[int, float, complex]


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvaluationError(ExprError):
    """Evaluation failed; the message names the offending subexpression."""


class UnboundParameterError(EvaluationError):
    def __init__(self, name: str):
        super().__init__(f"unbound parameter '{name}'")
        self.name = name


class PoleError(EvaluationError):
    def __init__(self, subexpr: "Expr", x: float, detail: str = "pole hit"):
        super().__init__(f"{detail} in '{subexpr}' at x={x!r}")
        self.subexpr = subexpr
        self.x = x


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Base node; all concrete nodes are frozen dataclasses."""

    def __add__(self, other):  return add(self, _as_expr(other))
    def __radd__(self, other): return add(_as_expr(other), self)
    def __sub__(self, other):  return sub(self, _as_expr(other))
    def __rsub__(self, other): return sub(_as_expr(other), self)
    def __mul__(self, other):  return mul(self, _as_expr(other))
    def __rmul__(self, other): return mul(_as_expr(other), self)
    def __truediv__(self, other):  return div(self, _as_expr(other))
    def __rtruediv__(self, other): return div(_as_expr(other), self)
    def __pow__(self, other):  return pow_(self, _as_expr(other))
    def __neg__(self):         return neg(self)

    def __str__(self) -> str:
        return _render(self)[0]


@dataclass(frozen=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Var(Expr):
    """The independent variable x."""


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Conj(Expr):
    """Complex conjugation; internal to parity images, not in the grammar."""
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


X = Var()
IMAG = Const(1j)

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, complex)):
        return Const(value)
    raise TypeError(f"cannot coerce {value!r} to Expr")


def _is_const(e: Expr, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


# ---------------------------------------------------------------------------
# Smart constructors: safe local simplification only
# ---------------------------------------------------------------------------

def const(value: Number) -> Const:
    return Const(value)


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = a.value + b.value
        if _finite(folded):
            return Const(folded)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = a.value - b.value
        if _finite(folded):
            return Const(folded)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = a.value * b.value
        if _finite(folded):
            return Const(folded)
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        folded = a.value / b.value
        if _finite(folded):
            return Const(folded)
    if _is_const(b, 1):
        return a
    return Div(a, b)


def pow_(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            folded = a.value ** b.value
        except (ZeroDivisionError, OverflowError, ValueError):
            folded = complex("nan")
        if _finite(folded):
            return Const(folded)
    if _is_const(b, 0):
        return _ONE
    if _is_const(b, 1):
        return a
    if _is_const(b, 2):
        return mul(a, a)
    return Pow(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def conj_expr(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(a.value.conjugate())
    if isinstance(a, Conj):
        return a.arg
    return Conj(a)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function '{name}'")
    return Func(name, arg)


# ---------------------------------------------------------------------------
# Parameter environment
# ---------------------------------------------------------------------------

class ParamEnv:
    """Immutable map name -> complex value; unbound lookups always raise."""

    def __init__(self, values: Mapping[str, Number] | None = None, **kwargs: Number):
        merged = dict(values or {})
        merged.update(kwargs)
        self._values = {name: complex(v) for name, v in merged.items()}

    def lookup(self, name: str) -> complex:
        try:
            return self._values[name]
        except KeyError:
            raise UnboundParameterError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def items(self):
        return self._values.items()

    def names(self):
        return tuple(sorted(self._values))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._values.items()))
        return f"ParamEnv({inner})"


EMPTY_ENV = ParamEnv()


def _coerce_env(env) -> ParamEnv:
    if env is None:
        return EMPTY_ENV
    if isinstance(env, ParamEnv):
        return env
    return ParamEnv(env)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def peek(self):
        saved = self.pos
        tok = self.next()
        self.pos = saved
        return tok

    def next(self):
        self._skip_ws()
        src, i = self.source, self.pos
        if i >= len(src):
            return ("end", "", i)
        ch = src[i]
        if ch in "+-*/^()":
            self.pos = i + 1
            return ("op", ch, i)
        if ch.isdigit() or ch == ".":
            j = i
            while j < len(src) and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < len(src) and src[j] in "eE":
                k = j + 1
                if k < len(src) and src[k] in "+-":
                    k += 1
                if k < len(src) and src[k].isdigit():
                    j = k
                    while j < len(src) and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number '{text}'", i)
            self.pos = j
            return ("number", text, i)
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] == "_"):
                j += 1
            self.pos = j
            return ("ident", src[i:j], i)
        raise ParseError(f"unexpected character {ch!r}", i)


class _Parser:
    def __init__(self, source: str):
        self.toks = _Tokenizer(source)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, offset = self.toks.peek()
        if kind != "end":
            if text == ")":
                raise ParseError("unbalanced ')'", offset)
            raise ParseError(f"unexpected trailing input '{text}'", offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, text, _ = self.toks.peek()
            if kind == "op" and text in "+-":
                self.toks.next()
                rhs = self.term()
                e = add(e, rhs) if text == "+" else sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, text, _ = self.toks.peek()
            if kind == "op" and text in "*/":
                self.toks.next()
                rhs = self.factor()
                e = mul(e, rhs) if text == "*" else div(e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        kind, text, _ = self.toks.peek()
        if kind == "op" and text == "-":
            self.toks.next()
            return neg(self.factor())
        base = self.atom()
        kind, text, _ = self.toks.peek()
        if kind == "op" and text == "^":
            self.toks.next()
            return pow_(base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.toks.next()
        if kind == "number":
            return Const(float(text))
        if kind == "op" and text == "(":
            e = self.expr()
            kind, text, offset = self.toks.next()
            if not (kind == "op" and text == ")"):
                raise ParseError("expected ')'", offset)
            return e
        if kind == "ident":
            if text == "x":
                return X
            if text == "i":
                return IMAG
            if text == "pi":
                return Const(math.pi)
            nk, nt, _ = self.toks.peek()
            if nk == "op" and nt == "(":
                if text not in FUNCTIONS:
                    raise ParseError(f"unknown function '{text}'", offset)
                self.toks.next()
                arg = self.expr()
                kind2, text2, offset2 = self.toks.next()
                if not (kind2 == "op" and text2 == ")"):
                    raise ParseError("expected ')'", offset2)
                return Func(text, arg)
            return Param(text)
        raise ParseError(f"expected an operand, found '{text or 'end of input'}'",
                         offset)


def parse(source: str) -> Expr:
    """Parse ``source`` into an Expr.  Raises ParseError with a byte offset."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Printer (round-trips through parse for grammar-built trees)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_real(v: float) -> str:
    if v == math.floor(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _render(e: Expr):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        re_, im_ = e.value.real, e.value.imag
        if im_ == 0.0:
            if re_ < 0:
                return f"-{_fmt_real(-re_)}", _PREC_UNARY
            return _fmt_real(re_), _PREC_ATOM
        if re_ == 0.0:
            if im_ == 1.0:
                return "i", _PREC_ATOM
            if im_ < 0:
                return f"-{_fmt_real(-im_)}*i", _PREC_MUL
            return f"{_fmt_real(im_)}*i", _PREC_MUL
        sign = "-" if im_ < 0 else "+"
        return (f"({_fmt_real(re_)}{sign}{_fmt_real(abs(im_))}*i)", _PREC_ATOM)
    if isinstance(e, Var):
        return "x", _PREC_ATOM
    if isinstance(e, Param):
        return e.name, _PREC_ATOM
    if isinstance(e, Neg):
        inner = _child(e.arg, _PREC_UNARY)
        return f"-{inner}", _PREC_UNARY
    if isinstance(e, Conj):
        return f"conj({_render(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Add):
        return (f"{_child(e.left, _PREC_ADD)}+{_child(e.right, _PREC_ADD + 1)}",
                _PREC_ADD)
    if isinstance(e, Sub):
        return (f"{_child(e.left, _PREC_ADD)}-{_child(e.right, _PREC_ADD + 1)}",
                _PREC_ADD)
    if isinstance(e, Mul):
        return (f"{_child(e.left, _PREC_MUL)}*{_child(e.right, _PREC_MUL + 1)}",
                _PREC_MUL)
    if isinstance(e, Div):
        return (f"{_child(e.left, _PREC_MUL)}/{_child(e.right, _PREC_MUL + 1)}",
                _PREC_MUL)
    if isinstance(e, Pow):
        base = _child(e.base, _PREC_ATOM)
        expo = _child(e.exponent, _PREC_UNARY)
        return f"{base}^{expo}", _PREC_POW
    if isinstance(e, Func):
        return f"{e.name}({_render(e.arg)[0]})", _PREC_ATOM
    raise TypeError(f"unknown node {e!r}")


def _child(e: Expr, minimum: int) -> str:
    text, prec = _render(e)
    if prec < minimum:
        return f"({text})"
    return text


# ---------------------------------------------------------------------------
# Differentiation (exact, closed over the grammar)
# ---------------------------------------------------------------------------

def differentiate(e: Expr, k: int = 1) -> Expr:
    """k-th exact symbolic derivative with respect to x (k >= 1)."""
    if not isinstance(k, int) or k < 1:
        raise ExprError(f"derivative order must be a positive integer, got {k!r}")
    out = e
    for _ in range(k):
        out = _d(out)
    return out


def _d(e: Expr) -> Expr:
    if isinstance(e, (Const, Param)):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Neg):
        return neg(_d(e.arg))
    if isinstance(e, Conj):
        # x is real, so conjugation commutes with d/dx
        return conj_expr(_d(e.arg))
    if isinstance(e, Add):
        return add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        return add(mul(_d(e.left), e.right), mul(e.left, _d(e.right)))
    if isinstance(e, Div):
        num = sub(mul(_d(e.left), e.right), mul(e.left, _d(e.right)))
        return div(num, mul(e.right, e.right))
    if isinstance(e, Pow):
        f, g = e.base, e.exponent
        if isinstance(g, Const):
            # principal branch: d/dx f^c = c f^(c-1) f'
            return mul(mul(g, pow_(f, Const(g.value - 1))), _d(f))
        inner = add(mul(_d(g), func("log", f)), mul(g, div(_d(f), f)))
        return mul(e, inner)
    if isinstance(e, Func):
        u, du = e.arg, _d(e.arg)
        name = e.name
        if name == "sin":
            outer = func("cos", u)
        elif name == "cos":
            outer = neg(func("sin", u))
        elif name == "tan":
            outer = mul(func("sec", u), func("sec", u))
        elif name == "sec":
            outer = mul(func("sec", u), func("tan", u))
        elif name == "exp":
            outer = func("exp", u)
        elif name == "log":
            return div(du, u)
        elif name == "sqrt":
            return div(du, mul(Const(2.0), func("sqrt", u)))
        elif name == "sinh":
            outer = func("cosh", u)
        elif name == "cosh":
            outer = func("sinh", u)
        elif name == "tanh":
            outer = sub(_ONE, mul(func("tanh", u), func("tanh", u)))
        else:  # pragma: no cover - func() rejects unknown names
            raise ExprError(f"no derivative rule for '{name}'")
        return mul(outer, du)
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expr, x: float, env=None) -> complex:
    """Evaluate at real x with all parameters bound; deterministic.

    Raises UnboundParameterError for missing parameters and PoleError when
    a denominator (or cos under sec/tan) falls below POLE_TOLERANCE or an
    intermediate stops being finite.
    """
    return _eval(e, float(x), _coerce_env(env))


def _check_finite(value: complex, e: Expr, x: float) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise PoleError(e, x, "non-finite value")
    return value


def _eval(e: Expr, x: float, env: ParamEnv) -> complex:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return complex(x)
    if isinstance(e, Param):
        return env.lookup(e.name)
    if isinstance(e, Neg):
        return -_eval(e.arg, x, env)
    if isinstance(e, Conj):
        return _eval(e.arg, x, env).conjugate()
    if isinstance(e, Add):
        return _check_finite(_eval(e.left, x, env) + _eval(e.right, x, env), e, x)
    if isinstance(e, Sub):
        return _check_finite(_eval(e.left, x, env) - _eval(e.right, x, env), e, x)
    if isinstance(e, Mul):
        return _check_finite(_eval(e.left, x, env) * _eval(e.right, x, env), e, x)
    if isinstance(e, Div):
        den = _eval(e.right, x, env)
        if abs(den) < POLE_TOLERANCE:
            raise PoleError(e, x)
        return _check_finite(_eval(e.left, x, env) / den, e, x)
    if isinstance(e, Pow):
        base = _eval(e.base, x, env)
        expo = _eval(e.exponent, x, env)
        try:
            value = base ** expo
        except (ZeroDivisionError, OverflowError, ValueError):
            raise PoleError(e, x) from None
        return _check_finite(value, e, x)
    if isinstance(e, Func):
        u = _eval(e.arg, x, env)
        try:
            if e.name == "sin":
                value = cmath.sin(u)
            elif e.name == "cos":
                value = cmath.cos(u)
            elif e.name in ("tan", "sec"):
                c = cmath.cos(u)
                if abs(c) < POLE_TOLERANCE:
                    raise PoleError(e, x)
                value = cmath.sin(u) / c if e.name == "tan" else 1.0 / c
            elif e.name == "exp":
                value = cmath.exp(u)
            elif e.name == "log":
                if u == 0:
                    raise PoleError(e, x)
                value = cmath.log(u)
            elif e.name == "sqrt":
                value = cmath.sqrt(u)
            elif e.name == "sinh":
                value = cmath.sinh(u)
            elif e.name == "cosh":
                value = cmath.cosh(u)
            elif e.name == "tanh":
                value = cmath.tanh(u)
            else:  # pragma: no cover
                raise ExprError(f"no evaluation rule for '{e.name}'")
        except OverflowError:
            raise PoleError(e, x, "overflow") from None
        return _check_finite(value, e, x)
    raise TypeError(f"unknown node {e!r}")


def evaluate_many(e: Expr, xs: Iterable[float], env=None) -> np.ndarray:
    """Evaluate at each point of ``xs``; returns a complex ndarray."""
    env = _coerce_env(env)
    return np.array([_eval(e, float(x), env) for x in xs], dtype=complex)


# ---------------------------------------------------------------------------
# Structural substitution
# ---------------------------------------------------------------------------

def substitute_x(e: Expr, replacement: Expr) -> Expr:
    """Replace the variable x by ``replacement``, rebuilding through the
    simplifying constructors."""
    if isinstance(e, Var):
        return replacement
    if isinstance(e, (Const, Param)):
        return e
    if isinstance(e, Neg):
        return neg(substitute_x(e.arg, replacement))
    if isinstance(e, Conj):
        return conj_expr(substitute_x(e.arg, replacement))
    if isinstance(e, Add):
        return add(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Sub):
        return sub(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Mul):
        return mul(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Div):
        return div(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Pow):
        return pow_(substitute_x(e.base, replacement),
                    substitute_x(e.exponent, replacement))
    if isinstance(e, Func):
        return func(e.name, substitute_x(e.arg, replacement))
    raise TypeError(f"unknown node {e!r}")
