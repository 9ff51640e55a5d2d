"""Linear text and prefix printers for coefficient expressions.

The text form uses ``^`` for powers, postfix ``!`` for factorials, and the
catalog names (``ln``, ``arctan``, ``Pi``, ``I``), with all spaces removed
so that it can be fed back to the parser.  The prefix form is the
coefficient grammar of the structured output (see ``docs/structured.md``).
"""

from __future__ import annotations

import sympy as sp
from sympy.printing.precedence import PRECEDENCE, precedence
from sympy.printing.str import StrPrinter

from .expr import PRINT_NAMES


def _fname(func):
    return PRINT_NAMES.get(func, getattr(func, "__name__", str(func)))


class TextPrinter(StrPrinter):
    """``StrPrinter`` with the surface syntax of the command line grammar."""

    def _print_Pow(self, expr, rational=False):
        b, e = expr.args
        if e == sp.S.Half:
            return f"sqrt({self._print(b)})"
        if e == -sp.S.Half:
            return f"1/sqrt({self._print(b)})"
        if e.is_Number and e < 0:
            inner = sp.Pow(b, -e)
            s = self._print(inner)
            if precedence(inner) < PRECEDENCE["Mul"] or (inner.is_Pow and not s.startswith("(")):
                s = f"({s})" if not s.replace("_", "").isalnum() else s
            return f"1/{s}"
        bs = self.parenthesize(b, PRECEDENCE["Pow"], strict=False)
        if b.is_Rational and b < 0 or (b.is_Number and not b.is_Integer):
            bs = f"({self._print(b)})"
        es = self._print(e)
        if not (e.is_Symbol or (e.is_Integer and e >= 0)):
            es = f"({es})"
        return f"{bs}^{es}"

    def _print_Mul(self, expr):
        # A number printed right before a parenthesised sum is distributed
        # into it on reparsing ("2*(a+x)*y", "-(a+x)*y", "1/(2*(a+x))").
        # In that case the numeric coefficient is written last instead.
        factors = sp.Mul.make_args(expr)
        if any(f.is_Pow and f.base.is_Rational and not f.base.is_Integer
               and f.exp.as_coeff_Mul()[0] < 0 for f in factors):
            # the denominator split would rewrite (1/2)^(-a) as 2^a
            c, rest = expr.as_coeff_Mul()
            parts = [self.parenthesize(f, PRECEDENCE["Mul"], strict=False)
                     for f in sp.Mul.make_args(rest)]
            head = "" if c == 1 else "-" if c == -1 else self.parenthesize(c, PRECEDENCE["Mul"]) + "*"
            return head + "*".join(parts)
        c, rest = expr.as_coeff_Mul()
        if c.is_Rational and c != 1 and (rest.is_Mul or rest.is_Pow):
            num, den = [], []
            for f in rest.as_ordered_factors():
                if f.is_Pow and f.exp.as_coeff_Mul()[0] < 0:
                    den.append(f.base)
                else:
                    num.append(f)
            if c.is_Rational and c != 1 and (
                (num and num[0].is_Add) or (c.q != 1 and den and den[0].is_Add)
            ):
                out = self._print(rest)
                if c.p != 1:
                    out += f"*{c.p}" if c.p > 0 else f"*({c.p})"
                if c.q != 1:
                    out += f"/{c.q}"
                return out
        return super()._print_Mul(expr)

    def _print_factorial(self, expr):
        a = expr.args[0]
        s = self._print(a)
        if not (a.is_Symbol or (a.is_Integer and a >= 0)):
            s = f"({s})"
        return f"{s}!"

    def _print_Pi(self, expr):
        return "Pi"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Infinity(self, expr):
        return "infinity"

    def _print_NegativeInfinity(self, expr):
        return "-infinity"

    def _print_EulerGamma(self, expr):
        return "gamma"

    def _print_ImaginaryUnit(self, expr):
        return "I"

    def _print_Function(self, expr):
        return f"{_fname(expr.func)}({','.join(self._print(a) for a in expr.args)})"

    def _print_exp(self, expr):
        return f"exp({self._print(expr.args[0])})"

    def _print_RisingFactorial(self, expr):
        return f"pochhammer({self._print(expr.args[0])},{self._print(expr.args[1])})"

    def _print_binomial(self, expr):
        return f"binomial({self._print(expr.args[0])},{self._print(expr.args[1])})"

    def _print_Product(self, expr):
        (j, lo, hi), = expr.limits
        return f"Product({self._print(expr.function)},{j}={self._print(lo)}..{self._print(hi)})"

    def _print_Sum(self, expr):
        (j, lo, hi), = expr.limits
        return f"Sum({self._print(expr.function)},{j}={self._print(lo)}..{self._print(hi)})"

    def _print_Integral(self, expr):
        (t, lo, hi), = expr.limits
        return f"Int({self._print(expr.function)},{t}={self._print(lo)}..{self._print(hi)})"

    def _print_RootSum(self, expr):
        lam = expr.fun
        (a,) = lam.variables
        return f"RootSum({self._print(expr.poly.as_expr())},{a},{self._print(lam.expr)})"

    def _print_Rational(self, expr):
        return f"{expr.p}/{expr.q}"

    def _print_Dummy(self, expr):
        return expr.name


_TEXT = TextPrinter({"order": None})


def expr_to_text(e) -> str:
    """Compact linear text of ``e``.

    >>> import sympy as sp
    >>> k = sp.Symbol('k')
    >>> expr_to_text((-1)**k/sp.factorial(2*k + 1))
    '(-1)^k/(2*k+1)!'
    """
    return _TEXT.doprint(sp.sympify(e)).replace(" ", "")


def signed_factor_text(c):
    """``(sign, text)`` of a coefficient written in front of another factor.

    The sign of a product is pulled out and sums are parenthesised as
    they are, which gives the usual displays ``-(n-1)*(n+1)*F(x)`` and
    ``(1-k)*a(k)`` for equations.

    >>> import sympy as sp
    >>> n = sp.Symbol('n')
    >>> signed_factor_text(sp.factor(1 - n**2))
    ('-', '(n-1)*(n+1)')
    >>> signed_factor_text(1 - n)
    ('', '(1-n)')
    """
    c = sp.sympify(c)
    sign = ""
    if (c.is_Mul or c.is_Number) and c.as_coeff_Mul()[0] < 0:
        sign, c = "-", -c
    txt = expr_to_text(c)
    if isinstance(c, sp.Add):
        txt = f"({txt})"
    return sign, txt


def expr_to_prefix(e) -> str:
    """Fully parenthesised prefix form used in the structured output.

    >>> import sympy as sp
    >>> k = sp.Symbol('k')
    >>> expr_to_prefix(sp.Rational(1, 2)*k**2)
    '(* 1/2 (^ k 2))'
    """
    e = sp.sympify(e)
    if e.is_Integer:
        return str(e.p)
    if e.is_Rational:
        return f"{e.p}/{e.q}"
    if e is sp.pi:
        return "Pi"
    if e is sp.I:
        return "I"
    if e is sp.E:
        return "(exp 1)"
    if e is sp.oo:
        return "infinity"
    if e is sp.S.NegativeInfinity:
        return "(* -1 infinity)"
    if e is sp.EulerGamma:
        return "gamma"
    if e.is_Symbol:
        return e.name
    if isinstance(e, sp.Add):
        return "(+ " + " ".join(expr_to_prefix(a) for a in _ordered(e)) + ")"
    if isinstance(e, sp.Mul):
        return "(* " + " ".join(expr_to_prefix(a) for a in _ordered(e)) + ")"
    if isinstance(e, sp.Pow):
        return f"(^ {expr_to_prefix(e.base)} {expr_to_prefix(e.exp)})"
    if isinstance(e, sp.factorial):
        return f"(! {expr_to_prefix(e.args[0])})"
    if isinstance(e, sp.RisingFactorial):
        return f"(pochhammer {expr_to_prefix(e.args[0])} {expr_to_prefix(e.args[1])})"
    if isinstance(e, (sp.Product, sp.Sum)):
        (j, lo, hi), = e.limits
        tag = "product" if isinstance(e, sp.Product) else "sum"
        return f"({tag} {expr_to_prefix(e.function)} {j} {expr_to_prefix(lo)} {expr_to_prefix(hi)})"
    if isinstance(e, sp.RootSum):
        (a,) = e.fun.variables
        return (
            f"(rootsum {expr_to_prefix(e.poly.as_expr())} {a.name} {expr_to_prefix(e.fun.expr)})"
        )
    if isinstance(e, sp.Function):
        return f"({_fname(e.func)} " + " ".join(expr_to_prefix(a) for a in e.args) + ")"
    raise TypeError(f"cannot print {type(e).__name__} in prefix form")


def _ordered(e):
    return sorted(e.args, key=sp.default_sort_key)
