"""A Pratt parser for the linear expression syntax.

The grammar (see ``docs/grammar.md``) has the usual infix operators with
``^`` binding tightest and associating to the right, unary signs, a
postfix ``!``, integer literals, identifiers and calls.  A few call forms
take a range argument ``name = lo..hi``::

    Int(exp(-t^2), t=0..x)
    Sum(x^k/k!, k=0..infinity)
    Product(j^2 + 1, j=0..k-1)

Calls are resolved against the function catalog at parse time; an
unknown name in call position is an error, in any other position it is
a symbol.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import sympy as sp

from .errors import ParseError, UnknownFunctionError
from .expr import is_known, lookup

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<range>\.\.)
  | (?P<num>\d+(?!\d|\.(?!\.)))
  | (?P<bad_num>\d+\.\d*|\.\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^!(),=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, range, end
    text: str
    line: int
    column: int


def tokenize(src: str):
    """Split ``src`` into tokens with 1-based line and column numbers.

    >>> [t.text for t in tokenize("x^2!")]
    ['x', '^', '2', '!', '']
    """
    out, pos, line, col0 = [], 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        col = pos - col0 + 1
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line=line, column=col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind == "bad_num":
            raise ParseError("decimal literals are not allowed", line=line, column=col)
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("end", "", line, pos - col0 + 1))
    return out


_CONSTANTS = {
    "Pi": sp.pi,
    "I": sp.I,
    "infinity": sp.oo,
    "gamma": sp.EulerGamma,
}

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY = 25
_POSTFIX = 40


def _special_call(name, args):
    """Calls that are not catalog functions; ``None`` if ``name`` is not one."""
    if name == "sqrt":
        return sp.sqrt(*args)
    if name == "factorial":
        return sp.factorial(*args)
    if name == "GAMMA":
        return sp.gamma(*args)
    if name == "pochhammer":
        return sp.RisingFactorial(*args)
    if name == "binomial":
        return sp.binomial(*args)
    return None


def _undefined(e):
    """True if ``e`` contains an undefined or infinite value outside a range bound."""
    if e in (sp.zoo, sp.nan, sp.oo, -sp.oo) or isinstance(e, sp.AccumBounds):
        return True
    if isinstance(e, (sp.Sum, sp.Product, sp.Integral)):
        (_, lo, _), = e.limits  # the upper bound may be infinity
        return _undefined(e.function) or _undefined(lo)
    return any(_undefined(a) for a in e.args if isinstance(a, sp.Basic))


class Parser:
    """Top-down operator precedence parser producing sympy expressions."""

    def __init__(self, src: str, symbols=None):
        self.tokens = tokenize(src)
        self.i = 0
        self.symbols = dict(symbols or {})

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, line=tok.line, column=tok.column)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind not in ("op", "range"):
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    # -- grammar ---------------------------------------------------------
    def parse(self):
        e = self.expression(0)
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        if e not in (sp.oo, -sp.oo) and _undefined(e):
            raise self.error("expression is undefined (division by zero or similar)", self.tokens[0])
        return e

    def expression(self, rbp):
        left = self.prefix()
        while True:
            t = self.tok
            if t.kind == "op" and t.text == "!":
                if _POSTFIX <= rbp:
                    break
                self.advance()
                left = sp.factorial(left)
                continue
            if t.kind != "op" or t.text not in _INFIX:
                break
            lbp = _INFIX[t.text]
            if lbp <= rbp:
                break
            self.advance()
            right = self.expression(lbp - 1 if t.text == "^" else lbp)
            left = self.combine(t.text, left, right)
        return left

    @staticmethod
    def combine(op, a, b):
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return a**b

    def prefix(self):
        t = self.advance()
        if t.kind == "num":
            return sp.Integer(int(t.text))
        if t.kind == "op" and t.text in "+-":
            operand = self.expression(_UNARY)
            return -operand if t.text == "-" else operand
        if t.kind == "op" and t.text == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        if t.kind == "name":
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(t)
            if t.text in _CONSTANTS:
                return _CONSTANTS[t.text]
            return self.symbol(t.text)
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise self.error(f"unexpected {found}", t)

    def symbol(self, name):
        if name not in self.symbols:
            self.symbols[name] = sp.Symbol(name)
        return self.symbols[name]

    def call(self, name_tok: Token):
        name = name_tok.text
        self.expect("(")
        if name in ("Int", "Sum", "Product"):
            return self.ranged(name_tok)
        if name == "RootSum":
            return self.root_sum()
        args = [self.expression(0)]
        while self.tok.text == "," and self.tok.kind == "op":
            self.advance()
            args.append(self.expression(0))
        self.expect(")")
        special = _special_call(name, args)
        if special is not None:
            return special
        if not is_known(name):
            raise UnknownFunctionError(
                f"unknown function {name!r} at line {name_tok.line}, column {name_tok.column}",
                obj=name,
            )
        fdef = lookup(name)
        if fdef.arity != len(args):
            raise self.error(f"{name} takes {fdef.arity} argument(s), got {len(args)}", name_tok)
        return fdef.cls(*args)

    def ranged(self, name_tok: Token):
        body = self.expression(0)
        self.expect(",")
        v = self.advance()
        if v.kind != "name":
            raise self.error("expected a bound variable", v)
        var = self.symbol(v.text)
        self.expect("=")
        lo = self.expression(0)
        self.expect("..")
        hi = self.expression(0)
        self.expect(")")
        cls = {"Int": sp.Integral, "Sum": sp.Sum, "Product": sp.Product}[name_tok.text]
        if name_tok.text == "Int" and lo != 0:
            raise self.error("integrals must start at 0", name_tok)
        return cls(body, (var, lo, hi))

    def root_sum(self):
        poly = self.expression(0)
        self.expect(",")
        v = self.advance()
        if v.kind != "name":
            raise self.error("expected a root symbol", v)
        a = self.symbol(v.text)
        self.expect(",")
        body = self.expression(0)
        self.expect(")")
        return sp.RootSum(sp.Poly(poly, a), sp.Lambda(a, body), auto=False)


def parse_expression(src: str, symbols=None):
    """Parse ``src`` into a sympy expression.

    >>> parse_expression("x^a*sin(x^2)")
    x**a*sin(x**2)
    >>> parse_expression("sin(x")
    Traceback (most recent call last):
    ...
    formalps.errors.ParseError: expected ')', found end of input at line 1, column 6
    >>> parse_expression("ln(x - x)")
    Traceback (most recent call last):
    ...
    formalps.errors.ParseError: expression is undefined (division by zero or similar) at line 1, column 1
    """
    return Parser(src, symbols).parse()


def parse_point(src: str):
    """Expansion point: a rational expression, ``infinity`` or ``-infinity``."""
    e = parse_expression(src)
    if e in (sp.oo, -sp.oo):
        return e
    if e.free_symbols:
        raise ParseError(f"expansion point {src!r} is not a constant", line=1, column=1)
    return e
