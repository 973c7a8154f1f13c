"""A small arithmetic expression language for user-supplied candidates.

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

so ``-q1^2`` is ``-(q1^2)`` and ``2^-1`` is ``2^(-1)``. Expressions are
immutable trees; :func:`to_text` prints the canonical form, which parses
back to an equal tree. :func:`compile_expression` turns a tree into a
function of a coordinate vector that works on floats and on the dual
numbers of :mod:`hjt.ad`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Union

from . import ad
from .errors import ExprSyntaxError, UnknownIdentifier

FUNCTIONS = {
    "sqrt": ad.sqrt,
    "sin": ad.sin,
    "cos": ad.cos,
    "exp": ad.exp,
    "log": ad.log,
    "abs": ad.absolute,
}


# ---------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expression"


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    left: "Expression"
    right: "Expression"


Expression = Union[Num, Name, Neg, Call, Add, Sub, Mul, Div, Pow]

_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div, "^": Pow}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Name: 5, Call: 5}


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str, names: Optional[frozenset]):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(msg, tok.line, tok.col)

    def _accept(self, *ops) -> Optional[_Tok]:
        if self.tok.kind == "op" and self.tok.text in ops:
            t = self.tok
            self.i += 1
            return t
        return None

    def _expect(self, op):
        if self._accept(op) is None:
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self._fail(f"expected {op!r}, found {found}")

    def parse(self) -> Expression:
        if self.tok.kind == "end":
            self._fail("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while (t := self._accept("+", "-")) is not None:
            node = _BINARY[t.text](node, self.term())
        return node

    def term(self):
        node = self.unary()
        while (t := self._accept("*", "/")) is not None:
            node = _BINARY[t.text](node, self.unary())
        return node

    def unary(self):
        if self._accept("-") is not None:
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self._accept("^") is not None:
            return Pow(base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "name":
            self.i += 1
            if self._accept("(") is not None:
                if t.text not in FUNCTIONS:
                    raise UnknownIdentifier(t.text, t.line, t.col)
                arg = self.expr()
                self._expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                self._fail(f"function {t.text!r} needs an argument", t)
            if self.names is not None and t.text not in self.names:
                raise UnknownIdentifier(t.text, t.line, t.col)
            return Name(t.text)
        if self._accept("(") is not None:
            node = self.expr()
            self._expect(")")
            return node
        if t.kind == "end":
            self._fail("unexpected end of input")
        self._fail(f"unexpected {t.text!r}")


def parse_expression(text: str, names: Optional[Iterable[str]] = None) -> Expression:
    """Parse ``text``; with ``names`` given, any other identifier is rejected."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 1, 1)
    return _Parser(text, frozenset(names) if names is not None else None).parse()


# ---------------------------------------------------------------------------
# printing


def _num_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node: Expression) -> str:
    """Canonical text with the fewest parentheses that preserve the tree."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _PREC[type(node.arg)] < 3)
    kind = type(node)
    prec = _PREC[kind]
    lp, rp = _PREC[type(node.left)], _PREC[type(node.right)]
    if kind is Pow:
        left = _wrap(node.left, lp <= prec)
        right = _wrap(node.right, rp < 3)
        return f"{left}^{right}"
    left = _wrap(node.left, lp < prec)
    right = _wrap(node.right, rp <= prec)
    sym = _SYMBOL[kind]
    return f"{left} {sym} {right}" if prec == 1 else f"{left}{sym}{right}"


def _wrap(node, paren: bool) -> str:
    s = to_text(node)
    return f"({s})" if paren else s


def identifiers(node: Expression) -> set:
    """Variable and parameter names used by ``node``."""
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return identifiers(node.arg)
    return identifiers(node.left) | identifiers(node.right)


# ---------------------------------------------------------------------------
# evaluation


def _power(a, b):
    if isinstance(b, ad.Dual):
        return ad.exp(b * ad.log(a))
    if isinstance(a, ad.Dual):
        return a ** b
    return math.pow(a, b)


def evaluate(node: Expression, env: Mapping):
    """Evaluate with ``env`` mapping names to floats or jets."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownIdentifier(node.name) from None
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        return FUNCTIONS[node.fn](evaluate(node.arg, env))
    a, b = evaluate(node.left, env), evaluate(node.right, env)
    if isinstance(node, Add):
        return a + b
    if isinstance(node, Sub):
        return a - b
    if isinstance(node, Mul):
        return a * b
    if isinstance(node, Div):
        return a / b
    return _power(a, b)


def coordinate_names(n: int, kinds: str = "q") -> list:
    """``q1..qn`` then ``v1..vn`` / ``p1..pn`` as requested by ``kinds``."""
    out = []
    for k in kinds:
        out.extend(f"{k}{i + 1}" for i in range(n))
    return out


def compile_expression(node: Expression, coords: list, params: Optional[Mapping] = None) -> Callable:
    """``x -> value`` where ``x[i]`` binds ``coords[i]``; params are constants."""
    params = dict(params or {})
    unknown = identifiers(node) - set(coords) - set(params)
    if unknown:
        raise UnknownIdentifier(sorted(unknown)[0])

    def fn(x):
        env = dict(params)
        env.update(zip(coords, x))
        return evaluate(node, env)

    return fn
