"""Independent truncated-series oracle.

A small Laurent-Puiseux series engine used to cross-check computed formal
power series.  It never goes through the DE/RE machinery: every function is
expanded by composing truncated series directly, either with a closed
Taylor expansion (``exp``, ``sin``, ``log``, binomial powers) or through
``F(g) = F(g(0)) + int F'(g) g'`` for functions with an algebraic or
elementary derivative.

Coefficients are sympy expressions that may contain the marker ``L`` for
``log(x)``; exponents are rationals.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .errors import OracleError

L = sp.Symbol("L_log")  # stands for log(x) inside coefficients


def _simp(c):
    return sp.expand(c)


def _is_zero(c):
    if c == 0:
        return True
    if c.is_number:
        v = sp.N(c, 40)
        if v != 0 and abs(v) > sp.Float("1e-30"):
            return False
    return sp.simplify(c) == 0


@dataclass
class TSeries:
    """``sum c_e x^e`` known exactly for all exponents below ``prec``."""

    coeffs: dict
    prec: object = sp.oo

    # -- construction ----------------------------------------------------
    @classmethod
    def const(cls, c):
        c = sp.sympify(c)
        return cls({} if c == 0 else {sp.Integer(0): c})

    @classmethod
    def monomial(cls, c, e):
        return cls({sp.Rational(e): sp.sympify(c)})

    def truncate(self, cap):
        prec = min(self.prec, cap)
        return TSeries({e: c for e, c in self.coeffs.items() if e < prec}, prec)

    # -- inspection ------------------------------------------------------
    def clean(self):
        return TSeries({e: c for e, c in self.coeffs.items() if not _is_zero(c)}, self.prec)

    def valuation(self):
        s = self.clean()
        return min(s.coeffs) if s.coeffs else self.prec

    def leading(self):
        s = self.clean()
        if not s.coeffs:
            raise OracleError("leading term of a series known to be zero only up to precision")
        v = min(s.coeffs)
        return v, s.coeffs[v]

    def coefficient(self, e):
        e = sp.Rational(e)
        if e >= self.prec:
            raise OracleError(f"coefficient of x^{e} beyond precision {self.prec}")
        return self.coeffs.get(e, sp.Integer(0))

    def has_log(self):
        return any(c.has(L) for c in self.coeffs.values())

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _lift(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = _simp(out.get(e, 0) + c)
        prec = min(self.prec, other.prec)
        return TSeries({e: c for e, c in out.items() if e < prec and c != 0}, prec)

    __radd__ = __add__

    def __neg__(self):
        return TSeries({e: -c for e, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        va, vb = self.valuation(), other.valuation()
        prec = min(va + other.prec, vb + self.prec)
        out = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = ea + eb
                if e < prec:
                    out[e] = out.get(e, 0) + ca * cb
        return TSeries({e: _simp(c) for e, c in out.items() if _simp(c) != 0}, prec)

    __rmul__ = __mul__

    def scale(self, c):
        return TSeries({e: _simp(c * v) for e, v in self.coeffs.items()}, self.prec)

    def shift(self, v):
        return TSeries({e + v: c for e, c in self.coeffs.items()}, self.prec + v)

    # -- calculus --------------------------------------------------------
    def derivative(self):
        out = {}
        for e, c in self.coeffs.items():
            d = _simp(e * c + sp.diff(c, L))
            if d != 0:
                out[e - 1] = _simp(out.get(e - 1, 0) + d)
        return TSeries(out, self.prec - 1)

    def integrate(self):
        """Termwise ``int_0^x``; requires every exponent above ``-1``."""
        out = {}
        for e, c in self.coeffs.items():
            if e <= -1:
                raise OracleError(f"divergent integral of x^{e}")
            poly = sp.Poly(c, L)
            for (j,), a in poly.terms():
                for i in range(j + 1):
                    term = (
                        (-1) ** i * sp.factorial(j) / sp.factorial(j - i)
                        * a * L ** (j - i) / (e + 1) ** (i + 1)
                    )
                    out[e + 1] = out.get(e + 1, 0) + term
        return TSeries({e: _simp(c) for e, c in out.items() if _simp(c) != 0}, self.prec + 1)

    def as_expr(self, x):
        return sp.Add(*[c.subs(L, sp.log(x)) * x**e for e, c in self.coeffs.items()])


def _lift(s):
    return s if isinstance(s, TSeries) else TSeries.const(s)


def _unit_series(u, coeff, cap):
    """``sum_j coeff(j) u^j`` for ``u`` of positive valuation, below ``cap``."""
    vu = u.valuation()
    if vu <= 0:
        raise OracleError("unit series needs an argument of positive valuation")
    if vu == sp.oo or vu >= cap:
        return TSeries.const(coeff(0)).truncate(max(cap, 0) if cap != sp.oo else sp.oo)
    terms = int(sp.ceiling(cap / vu))
    acc = TSeries.const(coeff(0))
    p = TSeries.const(1)
    for j in range(1, terms + 1):
        p = (p * u).truncate(cap)
        c = coeff(j)
        if c != 0:
            acc = acc + p.scale(c)
    return acc.truncate(min(cap, (terms + 1) * vu, u.prec))


def _split_unit(a, cap):
    """``a = c x^v (1 + u)`` with ``u`` of positive valuation."""
    v, c = a.leading()
    if c.has(L):
        raise OracleError("leading coefficient involves log(x)")
    u = a.shift(-v).scale(1 / c) - 1
    return v, c, u.truncate(cap - v)


def inverse(a, cap):
    v, c, u = _split_unit(a, cap + 2 * max(0, -a.valuation()) + 2)
    rel = cap + v
    s = _unit_series(u, lambda j: (-1) ** j, rel)
    return s.scale(1 / c).shift(-v).truncate(cap)


def power(a, alpha, cap):
    alpha = sp.sympify(alpha)
    if alpha.is_Integer and alpha >= 0:
        out = TSeries.const(1)
        for _ in range(int(alpha)):
            out = (out * a).truncate(cap)
        return out
    v, c, u = _split_unit(a, cap + 2 * max(0, -a.valuation()) + 2)
    ev = v * alpha
    if not ev.is_Rational:
        raise OracleError("non-rational exponent of x")
    rel = cap - ev
    s = _unit_series(u, lambda j: sp.binomial(alpha, j), rel)
    return s.scale(sp.Pow(c, alpha)).shift(ev).truncate(cap)


def _constant_part(a):
    v = a.valuation()
    if v < 0:
        raise OracleError("composition with an argument of negative valuation (essential singularity)")
    a0 = a.coeffs.get(sp.Integer(0), sp.Integer(0))
    if a0.has(L):
        raise OracleError("argument contains log(x) at order zero")
    return a0, a - a0


def s_exp(a, cap):
    a0, u = _constant_part(a)
    return _unit_series(u, lambda j: 1 / sp.factorial(j), cap).scale(sp.exp(a0))


def s_sin_cos(a, cap):
    a0, u = _constant_part(a)
    su = _unit_series(u, lambda j: 0 if j % 2 == 0 else (-1) ** (j // 2) / sp.factorial(j), cap)
    cu = _unit_series(u, lambda j: 0 if j % 2 else (-1) ** (j // 2) / sp.factorial(j), cap)
    s = su.scale(sp.cos(a0)) + cu.scale(sp.sin(a0))
    c = cu.scale(sp.cos(a0)) - su.scale(sp.sin(a0))
    return s, c


def s_log(a, cap):
    v, c, u = _split_unit(a, cap + 2)
    s = _unit_series(u, lambda j: 0 if j == 0 else sp.Integer(-1) ** (j + 1) / j, cap)
    return s + TSeries.const(sp.log(c) + v * L)


def _via_derivative(func, dfunc, a, cap, x):
    """``F(a) = F(a(0)) + int F'(a) a'``."""
    a0, _ = _constant_part(a)
    inner = (dfunc(a, cap + 1) * a.derivative()).truncate(cap)
    return inner.integrate().truncate(cap) + TSeries.const(func(a0))


def _one_minus_sq(a, cap):
    return TSeries.const(1) - (a * a).truncate(cap)


_DERIVS = {
    sp.atan: (sp.atan, lambda a, cap: inverse(TSeries.const(1) + (a * a).truncate(cap), cap)),
    sp.asin: (sp.asin, lambda a, cap: power(_one_minus_sq(a, cap), sp.Rational(-1, 2), cap)),
    sp.acos: (sp.acos, lambda a, cap: -power(_one_minus_sq(a, cap), sp.Rational(-1, 2), cap)),
    sp.asinh: (
        sp.asinh,
        lambda a, cap: power(TSeries.const(1) + (a * a).truncate(cap), sp.Rational(-1, 2), cap),
    ),
    sp.atanh: (sp.atanh, lambda a, cap: inverse(_one_minus_sq(a, cap), cap)),
    sp.erf: (sp.erf, lambda a, cap: s_exp(-(a * a).truncate(cap), cap).scale(2 / sp.sqrt(sp.pi))),
    sp.acosh: (
        sp.acosh,
        lambda a, cap: power((a * a).truncate(cap) - 1, sp.Rational(-1, 2), cap),
    ),
}


class Oracle:
    """Expand a sympy expression at ``0+`` in ``x`` up to (excluding) ``x^order``."""

    def __init__(self, x, cap):
        self.x = x
        self.cap = sp.Rational(cap)

    def run(self, e):
        e = sp.sympify(e)
        x, cap = self.x, self.cap
        if x not in e.free_symbols:
            return TSeries.const(e)
        if e == x:
            return TSeries.monomial(1, 1)
        if isinstance(e, sp.Add):
            out = TSeries.const(0)
            for a in e.args:
                out = out + self.run(a)
            return out.truncate(cap)
        if isinstance(e, sp.Mul):
            # lowest valuations first keep precision bookkeeping tight
            parts = [self.run(a) for a in e.args]
            out = TSeries.const(1)
            for p in parts:
                out = (out * p).truncate(cap)
            return out
        if isinstance(e, sp.Pow):
            b, ex = e.args
            if x in ex.free_symbols:
                return s_exp(self.run(ex * sp.log(b)), cap)
            if not ex.is_Rational:
                raise OracleError(f"symbolic exponent {ex}")
            sb = self.run(b)
            if ex.is_Integer and ex < 0:
                return inverse(power(sb, -ex, cap + self._slack(sb, -ex)), cap)
            return power(sb, ex, cap)
        f = type(e)
        if f is sp.exp:
            return s_exp(self.run(e.args[0]), cap)
        if f in (sp.sin, sp.cos):
            s, c = s_sin_cos(self.run(e.args[0]), cap)
            return s if f is sp.sin else c
        if f is sp.tan:
            s, c = s_sin_cos(self.run(e.args[0]), cap)
            return (s * inverse(c, cap)).truncate(cap)
        if f in (sp.sinh, sp.cosh):
            a = self.run(e.args[0])
            p, m = s_exp(a, cap), s_exp(-a, cap)
            return (p - m).scale(sp.Rational(1, 2)) if f is sp.sinh else (p + m).scale(sp.Rational(1, 2))
        if f is sp.log:
            return s_log(self.run(e.args[0]), cap)
        if f is sp.asech:
            u = e.args[0]
            return self.run(sp.log((1 + sp.sqrt(1 - u**2)) / u))
        if f is sp.Ei:
            a = self.run(e.args[0])
            if a.valuation() > 0:
                # Ei(a) = gamma + log(a) + int_0 (exp(a) - 1)/a da
                ex = s_exp(a, cap + 1) - 1
                inner = (ex * inverse(a, cap + 1)).truncate(cap + 1)
                inner = (inner * a.derivative()).truncate(cap)
                return inner.integrate().truncate(cap) + s_log(a, cap) + sp.EulerGamma
            return _via_derivative(sp.Ei, lambda g, c: (s_exp(g, c) * inverse(g, c)).truncate(c), a, cap, x)
        if f in _DERIVS:
            func, dfunc = _DERIVS[f]
            return _via_derivative(func, dfunc, self.run(e.args[0]), cap, x)
        if f.__name__ == "dilog":
            a = self.run(e.args[0])
            return _via_derivative(
                f, lambda g, c: (s_log(g, c) * inverse(TSeries.const(1) - g, c)).truncate(c), a, cap, x
            )
        if isinstance(e, sp.Integral):
            return self._integral(e)
        raise OracleError(f"oracle cannot expand {f.__name__}")

    @staticmethod
    def _slack(s, n):
        v = s.valuation()
        return max(0, -(n - 1) * v) if v != sp.oo else 0

    def _integral(self, e):
        (t, lo, hi), = e.limits
        if lo != 0:
            raise OracleError("only integrals from 0 are supported")
        sub = Oracle(t, self.cap + 1)
        s = sub.run(e.function).integrate().truncate(self.cap + 1)
        if hi == self.x:
            return s.truncate(self.cap)
        u = self.run(hi)
        out = TSeries.const(0)
        for ex, c in s.coeffs.items():
            if c.has(L):
                raise OracleError("log terms in an integral composed with a non-trivial bound")
            out = out + power(u, ex, self.cap).scale(c)
        return out.truncate(min(self.cap, s.prec * u.valuation()))


def _at_point(e, x, point, direction):
    point = sp.sympify(point)
    sign = -1 if direction == "left" else 1
    if point == sp.oo:
        return e.subs(x, 1 / x)
    if point == -sp.oo:
        return e.subs(x, -1 / x)
    if point == 0 and sign == 1:
        return e
    return e.subs(x, point + sign * x)


def truncated_series(e, x, order, point=0, direction="right", extra=6):
    """Series of ``e`` at ``point`` known exactly below ``x^order``.

    ``x`` must be a positive symbol so that ``sqrt(x**2) == x``.  The
    working cap is raised until the requested order is certified.

    >>> import sympy as sp
    >>> x = sp.Symbol('x', positive=True)
    >>> s = truncated_series(sp.sin(x), x, 6)
    >>> [s.coefficient(j) for j in range(6)]
    [0, 1, 0, -1/6, 0, 1/120]
    """
    e = _at_point(sp.sympify(e), x, point, direction)
    for attempt in range(4):
        s = Oracle(x, order + extra * (attempt + 1) ** 2).run(e)
        if s.prec >= order:
            return s.truncate(order)
    raise OracleError(f"could not certify precision {order} (got {s.prec})")
