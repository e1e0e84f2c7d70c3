"""A small expression language in one variable ``x``.

Grammar (``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 'x' | 'pi' | 'e' | ident '(' expr (',' expr)* ')' | '(' expr ')'

Expressions are immutable trees that can be printed, differentiated,
simplified and evaluated on numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainFault, ParseError, UnknownIdentifierError

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Const",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Func",
    "parse",
    "to_string",
    "differentiate",
    "simplify",
    "eval_expr",
    "is_constant",
]


# {{{ AST


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"literal must be finite: {self.value}")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: Expr


@dataclass(frozen=True)
class Add:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Func:
    name: str
    args: tuple[Expr, ...]


Expr = Union[Num, Var, Const, Neg, Add, Sub, Mul, Div, Pow, Func]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {"exp": 1, "ln": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "pow": 2}

X = Var()

# }}}


# {{{ parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    # offsets are reported in bytes of the UTF-8 encoding
    def boff(i: int) -> int:
        return len(text[:i].encode("utf-8"))

    while pos < len(text):
        if text[pos:].strip() == "":
            pos = len(text)
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", boff(start), text)
        kind = m.lastgroup
        assert kind is not None
        tokens.append(_Token(kind, m.group(kind), boff(m.start(kind))))
        pos = m.end()
    tokens.append(_Token("end", "", boff(len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, expected: str) -> ParseError:
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"expected {expected}, found {found}", tok.offset, self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            raise self.error(repr(op))

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error("operator or end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = Add(e, self.term())
            elif self.accept("-"):
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.accept("*"):
                e = Mul(e, self.unary())
            elif self.accept("/"):
                e = Div(e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        if self.accept("-"):
            arg = self.unary()
            # negative literals are stored as literals
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError("numeric literal out of range", tok.offset, self.text)
            return Num(value)
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name == "x":
                return X
            if name in CONSTANTS:
                return Const(name)
            if name not in FUNCTIONS:
                raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.offset, self.text)
            self.expect("(")
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[name]:
                raise ParseError(
                    f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                    tok.offset,
                    self.text,
                )
            return Func(name, tuple(args))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("expression")


def parse(text: str | bytes) -> Expr:
    """Parse *text* into an expression tree.

    Raises :class:`ParseError` (with a byte offset) on malformed input and
    :class:`UnknownIdentifierError` on names outside the language.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


# }}}


# {{{ printer

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 or math.copysign(1.0, v) > 0 else "-0"
    return repr(v)


def to_string(e: Expr) -> str:
    """Render *e* in the input syntax; ``parse(to_string(e)) == e``."""

    def wrap(sub: Expr, need: bool) -> str:
        s = to_string(sub)
        return f"({s})" if need else s

    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Neg):
        # keep -(2) distinct from the literal -2
        return "-" + wrap(e.arg, _prec(e.arg) < _PREC_NEG or isinstance(e.arg, Num))
    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        return wrap(e.left, _prec(e.left) < _PREC_ADD) + op + wrap(e.right, _prec(e.right) <= _PREC_ADD)
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return wrap(e.left, _prec(e.left) < _PREC_MUL) + op + wrap(e.right, _prec(e.right) <= _PREC_MUL)
    if isinstance(e, Pow):
        return wrap(e.base, _prec(e.base) <= _PREC_POW) + "^" + wrap(e.exponent, _prec(e.exponent) < _PREC_NEG)
    if isinstance(e, Func):
        return f"{e.name}({', '.join(to_string(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


# }}}


# {{{ simplification


def is_constant(e: Expr) -> bool:
    """True if *e* does not depend on ``x``."""
    if isinstance(e, Var):
        return False
    if isinstance(e, (Num, Const)):
        return True
    if isinstance(e, Neg):
        return is_constant(e.arg)
    if isinstance(e, Pow):
        return is_constant(e.base) and is_constant(e.exponent)
    if isinstance(e, Func):
        return all(is_constant(a) for a in e.args)
    return is_constant(e.left) and is_constant(e.right)


def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def _fold(e: Expr) -> Expr:
    """Replace an operation on literal operands by its value when finite."""
    try:
        with np.errstate(all="ignore"):
            v = float(eval_expr(e, np.float64(0.0)))
    except (DomainFault, ZeroDivisionError, OverflowError, ValueError):
        return e
    return Num(v) if math.isfinite(v) else e


def simplify(e: Expr) -> Expr:
    """Constant folding plus elimination of neutral and absorbing elements."""
    if isinstance(e, (Num, Var, Const)):
        return e
    if isinstance(e, Neg):
        a = simplify(e.arg)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, Func):
        args = tuple(simplify(a) for a in e.args)
        out = Func(e.name, args)
        return _fold(out) if all(isinstance(a, Num) for a in args) else out

    if isinstance(e, Pow):
        b, x = simplify(e.base), simplify(e.exponent)
        if _is(x, 0.0):
            return Num(1.0)
        if _is(x, 1.0):
            return b
        out = Pow(b, x)
        return _fold(out) if isinstance(b, Num) and isinstance(x, Num) else out

    left, right = simplify(e.left), simplify(e.right)
    if isinstance(e, Add):
        if _is(left, 0.0):
            return right
        if _is(right, 0.0):
            return left
        out = Add(left, right)
    elif isinstance(e, Sub):
        if _is(right, 0.0):
            return left
        if _is(left, 0.0):
            return simplify(Neg(right))
        out = Sub(left, right)
    elif isinstance(e, Mul):
        if _is(left, 0.0) or _is(right, 0.0):
            return Num(0.0)
        if _is(left, 1.0):
            return right
        if _is(right, 1.0):
            return left
        out = Mul(left, right)
    elif isinstance(e, Div):
        if _is(right, 1.0):
            return left
        if _is(left, 0.0) and not _is(right, 0.0):
            return Num(0.0)
        out = Div(left, right)
    else:
        raise TypeError(f"not an expression: {e!r}")
    if isinstance(left, Num) and isinstance(right, Num):
        return _fold(out)
    return out


# }}}


# {{{ differentiation


def _d(e: Expr) -> Expr:
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0)
    if isinstance(e, Neg):
        return Neg(_d(e.arg))
    if isinstance(e, Add):
        return Add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return Sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        return Add(Mul(_d(e.left), e.right), Mul(e.left, _d(e.right)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        return Div(Sub(Mul(_d(u), v), Mul(u, _d(v))), Pow(v, Num(2.0)))
    if isinstance(e, Pow):
        return _d_pow(e.base, e.exponent)
    if isinstance(e, Func):
        name = e.name
        if name == "pow":
            return _d_pow(*e.args)
        (u,) = e.args
        du = _d(u)
        if name == "exp":
            return Mul(du, e)
        if name == "ln":
            return Div(du, u)
        if name == "sin":
            return Mul(du, Func("cos", (u,)))
        if name == "cos":
            return Neg(Mul(du, Func("sin", (u,))))
        if name == "sqrt":
            return Div(du, Mul(Num(2.0), e))
        if name == "abs":
            # sign(u) u'; undefined at u = 0, left symbolic
            return Mul(Div(u, e), du)
    raise TypeError(f"cannot differentiate {e!r}")


def _d_pow(u: Expr, v: Expr) -> Expr:
    if is_constant(v):
        return Mul(Mul(v, Pow(u, Sub(v, Num(1.0)))), _d(u))
    if is_constant(u):
        return Mul(Mul(Pow(u, v), Func("ln", (u,))), _d(v))
    # u^v (v' ln u + v u'/u)
    return Mul(
        Pow(u, v),
        Add(Mul(_d(v), Func("ln", (u,))), Div(Mul(v, _d(u)), u)),
    )


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative d e / dx, simplified."""
    return simplify(_d(e))


# }}}


# {{{ evaluation


def _fault(msg: str, e: Expr, values: np.ndarray, bad: np.ndarray) -> DomainFault:
    where = np.asarray(values)[bad] if np.ndim(values) else values
    first = float(np.ravel(where)[0]) if np.size(where) else None
    return DomainFault(f"{msg} in '{to_string(e)}'", to_string(e), first)


def eval_expr(e: Expr, x) -> np.ndarray:
    """Evaluate *e* at *x* (scalar or array).

    Raises :class:`DomainFault` naming the offending subexpression when an
    operation leaves its real domain or produces a non-finite value.
    """
    x = np.asarray(x, dtype=float)

    def ev(e: Expr):
        if isinstance(e, Num):
            return np.full(x.shape, e.value)
        if isinstance(e, Var):
            return x
        if isinstance(e, Const):
            return np.full(x.shape, CONSTANTS[e.name])
        if isinstance(e, Neg):
            return -ev(e.arg)
        if isinstance(e, Func):
            args = [ev(a) for a in e.args]
            return _eval_func(e, args)
        if isinstance(e, Pow):
            return _eval_pow(e, ev(e.base), ev(e.exponent))

        left, right = ev(e.left), ev(e.right)
        with np.errstate(all="ignore"):
            if isinstance(e, Add):
                out = left + right
            elif isinstance(e, Sub):
                out = left - right
            elif isinstance(e, Mul):
                out = left * right
            else:
                zero = right == 0
                if np.any(zero):
                    raise _fault("division by zero", e, x, zero)
                out = left / right
        bad = ~np.isfinite(out)
        if np.any(bad):
            raise _fault("non-finite result", e, x, bad)
        return out

    return ev(e)


def _eval_pow(e, base, expo):
    integral = expo == np.round(expo)
    bad = (base < 0) & ~integral
    if np.any(bad):
        raise _fault("negative base with non-integer exponent", e, base, bad)
    bad = (base == 0) & (expo < 0)
    if np.any(bad):
        raise _fault("zero raised to a negative power", e, base, bad)
    with np.errstate(all="ignore"):
        out = np.power(base, expo)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise _fault("non-finite result", e, base, bad)
    return out


def _eval_func(e: Func, args):
    name = e.name
    if name == "pow":
        return _eval_pow(e, *args)
    (u,) = args
    if name == "ln":
        bad = u <= 0
        if np.any(bad):
            raise _fault("logarithm of a non-positive value", e, u, bad)
        return np.log(u)
    if name == "sqrt":
        bad = u < 0
        if np.any(bad):
            raise _fault("square root of a negative value", e, u, bad)
        return np.sqrt(u)
    with np.errstate(all="ignore"):
        out = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}[name](u)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise _fault("non-finite result", e, u, bad)
    return out


# }}}
