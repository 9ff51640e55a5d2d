"""One-sided limits at zero and Taylor seeds.

The ladder tries cheap exact methods first:

1. guarded direct substitution (rejected if any subexpression becomes
   ``zoo`` or ``nan``),
2. substitution after ``cancel``/``together``,
3. L'Hopital's rule on ``0/0`` and ``oo/oo`` quotients (bounded depth),
4. sympy's Gruntz implementation as a last resort.

A limit that none of the rungs settles raises ``LimitUndecidedError``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import sympy as sp

from .errors import LimitUndecidedError

log = logging.getLogger("formalps.limits")

_BAD = (sp.zoo, sp.nan, sp.oo, -sp.oo)
_LHOPITAL_DEPTH = 8


@dataclass(frozen=True)
class LimitValue:
    """Exact limit; ``value`` may be ``oo``, ``-oo`` or ``zoo``."""

    value: sp.Expr

    @property
    def is_finite(self):
        return self.value.is_finite is not False and not self.value.has(sp.zoo, sp.oo, -sp.oo)

    def __eq__(self, other):
        other = other.value if isinstance(other, LimitValue) else sp.sympify(other)
        return sp.simplify(self.value - other) == 0 if self.is_finite else self.value == other

    def __hash__(self):
        return hash(self.value)


def _guarded_subs(e, var):
    """Substitute ``var = 0`` bottom up; ``None`` if anything blows up."""
    if var not in e.free_symbols:
        return e
    if e == var:
        return sp.Integer(0)
    if not e.args:
        return e
    if isinstance(e, (sp.Integral, sp.Derivative)):
        return None
    new_args = []
    for a in e.args:
        v = _guarded_subs(a, var)
        if v is None:
            return None
        new_args.append(v)
    try:
        out = e.func(*new_args)
    except (ZeroDivisionError, ValueError, TypeError):
        return None
    if out.has(*_BAD):
        return None
    return out


def _right_limit(e, var, depth=0):
    v = _guarded_subs(e, var)
    if v is not None:
        return v
    c = sp.cancel(sp.together(e))
    if c != e:
        v = _guarded_subs(c, var)
        if v is not None:
            return v
    if depth < _LHOPITAL_DEPTH:
        n, d = sp.fraction(c)
        if d != 1 and var in d.free_symbols:
            ln_, ld_ = _quick(n, var), _quick(d, var)
            indeterminate = (ln_ == 0 and ld_ == 0) or (ln_ == sp.oo and ld_ == sp.oo)
            if indeterminate:
                q = sp.cancel(sp.together(sp.diff(n, var) / sp.diff(d, var)))
                try:
                    return _right_limit(q, var, depth + 1)
                except LimitUndecidedError:
                    pass
    return _gruntz(e, var)


def _quick(e, var):
    """Cheap value at ``0``: exact, ``oo`` for a plain blow-up, else ``None``."""
    v = _guarded_subs(e, var)
    if v is not None:
        return v
    try:
        w = e.subs(var, 0)
    except (ZeroDivisionError, ValueError, TypeError):
        return None
    if w in (sp.zoo, sp.oo, -sp.oo):
        return sp.oo
    return None


def _gruntz(e, var):
    try:
        r = sp.limit(e, var, 0, "+")
    except (NotImplementedError, ValueError, TypeError, RecursionError) as exc:
        raise LimitUndecidedError(f"limit of {e} undecided ({exc})", obj=e) from None
    if isinstance(r, sp.Limit) or r.has(sp.AccumBounds) or r.has(sp.nan) or r.has(sp.Limit):
        raise LimitUndecidedError(f"limit of {e} undecided", obj=e)
    return r


def limit_at_zero(e, var, direction="right") -> LimitValue:
    """Limit of ``e`` as ``var -> 0`` from ``right``, ``left`` or ``both`` sides.

    >>> import sympy as sp
    >>> x = sp.Symbol('x', positive=True)
    >>> limit_at_zero(sp.sin(x)/x, x).value
    1
    >>> limit_at_zero(sp.asech(x) + sp.log(x), x).value
    log(2)
    """
    e = sp.sympify(e)
    if direction == "right":
        return LimitValue(_right_limit(_as_positive(e, var), _POS))
    if direction == "left":
        return LimitValue(_right_limit(_as_positive(e, var, -1), _POS))
    if direction == "both":
        a = limit_at_zero(e, var, "right")
        b = limit_at_zero(e, var, "left")
        if a != b:
            raise LimitUndecidedError(
                f"one-sided limits differ: {a.value} and {b.value}", obj=e
            )
        return a
    raise ValueError(f"bad direction {direction!r}")


_POS = sp.Dummy("t", positive=True)


def _as_positive(e, var, sign=1):
    return e.subs(var, sign * _POS)


def taylor_seed(e, var, k, direction="right"):
    """``lim e^(k)(x)/k!`` at zero."""
    d = sp.diff(e, var, k) if k else e
    return limit_at_zero(d, var, direction).value / sp.factorial(k)


def series_coefficients(e, var, order):
    """Generalised series coefficients of ``e`` at ``0+`` up to ``var**order``.

    Returns a dict ``{exponent: coefficient}``; a ``log(var)`` factor stays
    inside the coefficient.  Used to validate recurrences, never to produce
    results.
    """
    t = _POS
    s = sp.series(e.subs(var, t), t, 0, order).removeO()
    out = {}
    for term in sp.Add.make_args(sp.expand(s)):
        if term == 0:
            continue
        c, p = term.as_independent(t, as_Add=False)
        if p == 1:
            ex = sp.Integer(0)
        else:
            ex = sp.Integer(0)
            rest = sp.Integer(1)
            for f in sp.Mul.make_args(p):
                b, pe = f.as_base_exp()
                if b == t:
                    ex += pe
                else:
                    rest *= f
            c = c * rest.subs(t, var)
        out[ex] = sp.simplify(out.get(ex, 0) + c)
    return {k: v for k, v in out.items() if v != 0}
