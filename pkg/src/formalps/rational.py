"""Series of rational functions by partial fractions.

Every pole term ``c/(x - alpha)^j`` with ``alpha != 0`` expands by the
binomial series

    a_k = (-1)^j c / alpha^(j+k) * binomial(j + k - 1, k),

poles at the origin give a finite Laurent prefix and the polynomial part
stays as a finite explicit part.  Denominator factors of degree at most
two are split over their explicit roots; anything else (or every factor
when ``explicit=False``) is kept as a formal sum over the roots of the
irreducible factor, with the per-root coefficient reduced modulo that
factor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import sympy as sp

from .arith import factor_over_Q
from .errors import LimitUndecidedError
from .hypergeom import integrate_result, singular_part
from .limits import limit_at_zero
from .recurrence import K
from .series import FPSResult, PowerSum

log = logging.getLogger("formalps.rational")

ALPHA = sp.Symbol("alpha")


@dataclass(frozen=True)
class PoleTerm:
    """``residue/(x - alpha)^order`` with ``alpha != 0``."""

    residue: sp.Expr
    alpha: sp.Expr
    order: int


@dataclass(frozen=True)
class RootSumTerm:
    """``sum over the roots alpha of poly`` of ``sum_j residues[j]/(x - alpha)^j``.

    ``residues`` maps a pole order to a polynomial in :data:`ALPHA` of
    degree below ``poly.degree()``.
    """

    poly: sp.Poly
    residues: tuple  # (order, residue in ALPHA)


@dataclass(frozen=True)
class PartialFractions:
    polynomial: sp.Expr
    poles: tuple
    root_sums: tuple
    laurent: tuple  # (exponent < 0, coefficient)

    def as_expr(self, x):
        out = self.polynomial
        for t in self.poles:
            out += t.residue / (x - t.alpha) ** t.order
        for e, c in self.laurent:
            out += c * x**e
        for rs in self.root_sums:
            body = sum(c / (x - ALPHA) ** j for j, c in rs.residues)
            out += sp.RootSum(rs.poly, sp.Lambda(ALPHA, body))
        return out


def reduce_mod(expr, alpha, poly):
    """Canonical representative of a rational function of ``alpha`` modulo ``poly``.

    >>> a = sp.Symbol('a')
    >>> reduce_mod(a/(2*a + 1), a, sp.Poly(a**2 + a - 1, a))
    2/5 - a/5
    """
    num, den = sp.fraction(sp.cancel(sp.together(sp.sympify(expr))))
    p = poly.as_expr()
    inv = sp.invert(den, p, alpha) if sp.Poly(den, alpha).degree() > 0 else 1 / den
    out = sp.rem(sp.expand(num * inv), p, alpha)
    return sp.expand(out)


def _principal_part(rem, den_const, others, p, mult, x, alpha):
    """Residues ``c_j`` of ``rem/(den_const*others*p^mult)`` at a root ``alpha`` of ``p``."""
    pa = sp.Poly(p.as_expr().subs(x, alpha), alpha)
    q = sp.quo(p.as_expr() - pa.as_expr(), x - alpha, x)
    h = rem / (den_const * others * q**mult)
    out = []
    deriv = h
    for t in range(mult):
        if t:
            deriv = sp.diff(deriv, x)
        c = sp.together(deriv.subs(x, alpha)) / sp.factorial(t)
        out.append((mult - t, c))
    return out


def partial_fractions(r, x, explicit=True) -> PartialFractions:
    """Complete partial fraction decomposition of the rational function ``r``.

    >>> x = sp.Symbol('x')
    >>> pf = partial_fractions((1 + x + x**2 + x**3)/((x - 1)*(x - 2)), x)
    >>> pf.polynomial
    x + 4
    >>> sorted((t.alpha, t.residue) for t in pf.poles)
    [(1, -4), (2, 15)]
    """
    num, den = sp.fraction(sp.cancel(sp.together(sp.sympify(r))))
    poly_part, rem = sp.div(sp.expand(num), sp.expand(den), x)
    const, low, rest = factor_over_Q(sp.Poly(den, x), x)
    groups = list(low)
    if rest.degree() > 0:
        _, big = rest.factor_list()
        groups += big
    poles, root_sums, laurent = [], [], []
    den_poly = sp.Poly(den, x)
    for p, mult in groups:
        others = sp.quo(den_poly, p**mult).as_expr() / const
        a = sp.Symbol("alpha_tmp")
        parts = _principal_part(rem, const, others, p, mult, x, a)
        if p.degree() == 1 and p.as_expr().subs(x, 0) == 0:
            for j, c in parts:
                laurent.append((sp.Integer(-j), sp.simplify(c.subs(a, 0))))
            continue
        if explicit and p.degree() <= 2:
            for root in _explicit_roots(p, x):
                for j, c in parts:
                    poles.append(PoleTerm(sp.simplify(sp.radsimp(c.subs(a, root))), root, j))
            continue
        pa = sp.Poly(p.as_expr().subs(x, ALPHA), ALPHA)
        res = tuple(
            (j, reduce_mod(c.subs(a, ALPHA), ALPHA, pa)) for j, c in parts
        )
        root_sums.append(RootSumTerm(pa, res))
    laurent.sort()
    return PartialFractions(sp.expand(poly_part), tuple(poles), tuple(root_sums), tuple(laurent))


def _explicit_roots(p, x):
    if p.degree() == 1:
        a, b = p.all_coeffs()
        return [sp.cancel(-b / a)]
    found = sp.roots(p, x)
    out = []
    for rt, mult in found.items():
        out += [sp.simplify(rt)] * mult
    return sorted(out, key=sp.default_sort_key)


def _binomial_factor(j):
    """``binomial(j + k - 1, k)`` as a factorial ratio."""
    if j == 1:
        return sp.Integer(1)
    return sp.factorial(K + j - 1) / (sp.factorial(j - 1) * sp.factorial(K))


def expand_pole(t: PoleTerm):
    """Coefficient of ``x^k`` in ``t.residue/(x - t.alpha)^t.order``.

    >>> expand_pole(PoleTerm(sp.Integer(1), sp.Integer(1), 2))
    factorial(k + 1)/factorial(k)
    """
    j = t.order
    inv = sp.radsimp(1 / t.alpha)
    const = sp.radsimp(sp.simplify((-1) ** j * t.residue * inv**j))
    return const * _binomial_factor(j) * sp.Pow(inv, K)


def expand_root_sum(rs: RootSumTerm):
    """Coefficient of ``x^k`` of a root sum, as a (unevaluated) ``RootSum``."""
    body = sp.Integer(0)
    for j, c in rs.residues:
        body += reduce_mod((-1) ** j * c, ALPHA, rs.poly) * _binomial_factor(j) / ALPHA ** (j + K)
    return sp.RootSum(rs.poly, sp.Lambda(ALPHA, body), auto=False)


def _tidy(c):
    """Readable combined coefficient; the value is unchanged."""
    if c.has(sp.RootSum, sp.I):
        return c
    nice = sp.factor_terms(sp.together(c))
    return nice if sp.count_ops(nice) <= sp.count_ops(c) else c


def rational_fps(r, x, explicit=True, direction="right") -> FPSResult:
    """Closed-form Laurent series of a rational function at ``x = 0``."""
    pf = partial_fractions(r, x, explicit)
    log.info("partial fractions: %d explicit poles, %d root sums", len(pf.poles), len(pf.root_sums))
    terms = []
    poly = sp.Poly(pf.polynomial, x)
    for (i,), c in poly.terms():
        terms.append((sp.Integer(i), c))
    terms += list(pf.laurent)
    coeff = sp.Add(*[expand_pole(t) for t in pf.poles])
    coeff = _tidy(coeff) if coeff != 0 else coeff
    for rs in pf.root_sums:
        coeff += expand_root_sum(rs)
    sums = (PowerSum(coeff, 1, 1, 0, sp.Integer(0)),) if coeff != 0 else ()
    return FPSResult(sums, tuple(terms), var=x, direction=direction).normalised()


def is_rational_in(e, x):
    """True if ``e`` is (after normalisation) a rational function of ``x``."""
    e = sp.sympify(e)
    if e.is_rational_function(x):
        return True
    return sp.cancel(sp.together(e)).is_rational_function(x)


def integrate_series_k_times(s: FPSResult, k, f=None, var=None, direction="right") -> FPSResult:
    """Antiderivative of order ``k`` of the series ``s`` of ``f^(k)``.

    Each integration constant is the limit at ``0`` of the matching
    derivative of ``f`` minus the singular part of the partial
    antiderivative.  Without ``f`` the constants are zero.
    """
    var = var or s.var
    out = s
    for i in range(1, k + 1):
        out = integrate_result(out, var)
        if f is None:
            continue
        target = sp.diff(f, var, k - i) if k - i else f
        lim = limit_at_zero(sp.expand(target - singular_part(out, var)), var, direction)
        if not lim.is_finite:
            raise LimitUndecidedError("integration constant diverges", obj=target)
        out = out.map(constant=out.constant + sp.simplify(lim.value)).normalised()
    return out.map(point=s.point, direction=s.direction)
