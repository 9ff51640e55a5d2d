"""The top-level search: DE, recurrence, and one of three solvers.

For ``k = 1, 2, ...`` a simple DE of degree ``k`` is sought.  Within one
``k`` the branches are tried in a fixed order:

1. the recurrence has two terms (hypergeometric type),
2. free parameters can be chosen so that it has two terms,
3. the DE has constant coefficients (exp-like type),
4. free parameters can be chosen to make the coefficients constant,
5. ``f^(k)`` is rational; its series is integrated ``k`` times.

A rational ``f`` itself is handled before the loop.  Other expansion
points are reduced to ``x = 0`` by substitution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import sympy as sp

from .errors import (
    BranchFailedError,
    EssentialSingularityError,
    FPSError,
    LimitUndecidedError,
    NoDEFoundError,
)
from .expr import check_catalog
from .explike import solve_explike, tune_constant_coefficients
from .hypergeom import TransformTrace, detect_hypergeometric, solve_function, tune_two_term
from .limits import limit_at_zero
from .rational import integrate_series_k_times, is_rational_in, rational_fps
from .recurrence import convert_de_to_re
from .series import FPSResult
from .simple_de import ParametricDE, find_simple_de

log = logging.getLogger("formalps.pipeline")

METHODS = ("auto", "hypergeometric", "explike", "rational")
DIRECTIONS = ("left", "right", "both")

#: the positive local variable every expansion is computed in
LOCAL = sp.Symbol("x", positive=True)


@dataclass
class Attempt:
    """One branch attempt, kept for the trace and error reports."""

    k: int
    branch: str
    outcome: str


@dataclass
class SearchLog:
    attempts: list = field(default_factory=list)

    def note(self, k, branch, outcome):
        self.attempts.append(Attempt(k, branch, outcome))
        log.debug("degree %d, %s: %s", k, branch, outcome)


def _allowed(method, branch):
    return method == "auto" or method == branch


def _hypergeometric(de, g, x, k, slog):
    """Branches 1 and 2; ``None`` if neither applies."""
    re = convert_de_to_re(de)
    log.info("RE = %s", re)
    if not re.is_parametric():
        try:
            h = detect_hypergeometric(re)
        except FPSError as exc:
            slog.note(k, "two-term", str(exc))
            return None
        log.info("RE is of hypergeometric type, symmetry number m = %d", h.m)
        log.info("RE: %s", h)
        return solve_function(h, g, x, "right", trace=TransformTrace())
    try:
        values, h = tune_two_term(re, g, x)
    except FPSError as exc:
        slog.note(k, "tuned two-term", str(exc))
        return None
    log.info("parameters %s give a two-term RE, symmetry number m = %d", values, h.m)
    log.info("RE: %s", h)
    res = solve_function(h, g, x, "right", trace=TransformTrace())
    return res.map(meta=dict(res.meta) | {"tuning": values})


def _explike(de, g, x, k, slog):
    """Branches 3 and 4; ``None`` if neither applies."""
    values = {}
    if not de.is_constant_coefficient() or isinstance(de, ParametricDE) and de.parameters:
        try:
            values, de = tune_constant_coefficients(de, return_values=True)
        except FPSError as exc:
            slog.note(k, "tuned constant coefficients", str(exc))
            return None
    log.info("DE has constant coefficients: %s", de)
    res = solve_explike(de, g, x, "right")
    return res.map(meta=dict(res.meta) | {"tuning": values}) if values else res


def _rational(g, x, k, explicit, slog):
    """Branch 5 (``k >= 1``) or the rational input itself (``k = 0``)."""
    d = sp.diff(g, x, k) if k else g
    if not is_rational_in(d, x):
        return None
    log.info("derivative of order %d is rational", k)
    s = rational_fps(sp.cancel(sp.together(d)), x, explicit)
    return integrate_series_k_times(s, k, g, x) if k else s


def _core(g, x, method, kmax, explicit, slog):
    """Series of ``g`` at ``0+`` in the positive variable ``x``."""
    failure = None
    found = []
    if _allowed(method, "rational"):
        res = _rational(g, x, 0, explicit, slog)
        if res is not None:
            return res.map(meta=dict(res.meta) | {"method": "rational", "degree": 0})
    for k in range(1, kmax + 1):
        log.info("looking for DE of degree %d", k)
        try:
            de = find_simple_de(g, x, k)
        except NoDEFoundError:
            de = None
        if de is not None:
            found.append(k)
            log.info("DE of degree %d found: %s", k, de)
            branches = []
            if _allowed(method, "hypergeometric"):
                branches.append(("hypergeometric", _hypergeometric))
            if _allowed(method, "explike"):
                branches.append(("explike", _explike))
            for name, fn in branches:
                try:
                    res = fn(de, g, x, k, slog)
                except EssentialSingularityError:
                    raise
                except FPSError as exc:
                    slog.note(k, name, str(exc))
                    failure = exc
                    continue
                if res is not None:
                    return res.map(meta=dict(res.meta) | {"method": name, "degree": k, "de": de})
        if _allowed(method, "rational"):
            try:
                res = _rational(g, x, k, explicit, slog)
            except FPSError as exc:
                slog.note(k, "rational", str(exc))
                failure = exc
                res = None
            if res is not None:
                return res.map(meta=dict(res.meta) | {"method": "rational", "degree": k})
    if method != "auto":
        raise BranchFailedError(
            f"method {method} failed" + (f": {failure}" if failure else ""), obj=g
        )
    if failure is not None:
        raise failure
    if found:
        raise BranchFailedError(
            f"simple DEs of degrees {found} found, but none is of hypergeometric, "
            "exp-like or rational type", obj=g
        )
    raise NoDEFoundError(f"no simple DE of degree <= {kmax}", obj=g)


def _split_power(f, var):
    """``(a, rest)`` with ``f = var^a * rest`` for a symbolic exponent ``a``."""
    if not isinstance(f, sp.Mul):
        factors = [f]
    else:
        factors = list(f.args)
    a = sp.Integer(0)
    rest = []
    for fac in factors:
        b, e = fac.as_base_exp()
        if b == var and not e.is_number and not e.has(var):
            a += e
        else:
            rest.append(fac)
    return a, sp.Mul(*rest)


def _localise(f, var, point, direction):
    """Expression in the positive local variable and the effective direction."""
    x = LOCAL
    if point == sp.oo:
        return f.subs(var, 1 / x), "right"
    if point == -sp.oo:
        return f.subs(var, -1 / x), "right"
    if direction == "left":
        return f.subs(var, point - x), "left"
    return f.subs(var, point + x), direction


def _two_sided_ok(f, var, point, res: FPSResult):
    """For integer-exponent results: do both one-sided limits of ``f`` agree at the point?"""
    exps = [sp.sympify(e) for e, _ in res.terms]
    exps += [p.exponent(0) for p in res.sums]
    if res.constant != 0:
        exps.append(sp.Integer(0))
    v = min(exps, key=lambda e: float(e)) if exps else sp.Integer(0)
    t = sp.Dummy("t")
    probe = sp.powsimp(f.subs(var, point + t) * t ** (-v))
    try:
        limit_at_zero(probe, t, "both")
    except LimitUndecidedError:
        return False
    return True


def formal_power_series(f, var, point=0, direction=None, method="auto", kmax=5,
                        explicit=True, real=False) -> FPSResult:
    """Closed-form Laurent-Puiseux series of ``f`` in ``var`` at ``point``.

    ``direction`` defaults to two-sided at finite points; expansions at
    infinity are always one-sided from within the real line.  With
    ``method`` a single solving branch can be forced.

    >>> x = sp.Symbol('x')
    >>> from formalps.series import render
    >>> render(formal_power_series(sp.sin(x), x))
    'Sum((-1)^k*x^(2*k+1)/(2*k+1)!, k=0..infinity)'
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    f = sp.sympify(f)
    point = sp.sympify(point)
    if direction is None:
        direction = "right" if point in (sp.oo, -sp.oo) else "both"
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    check_catalog(f)
    slog = SearchLog()
    a = sp.Integer(0)
    body = f
    if point == 0:
        a, body = _split_power(f, var)
        if a != 0:
            log.info("splitting off %s^(%s)", var, a)
    g, eff = _localise(body, var, point, direction)
    x = LOCAL
    g = sp.powsimp(g)
    res = _core(g, x, method, kmax, explicit, slog)
    if a != 0:
        res = res.shifted(a)
    out_dir = eff
    if eff == "both":
        if res.is_one_sided() or a != 0 or not _two_sided_ok(body, var, point, res):
            log.info("result is one-sided")
            out_dir = "right"
    res = res.map(point=point, direction=out_dir, var=var,
                  meta=dict(res.meta) | {"attempts": slog.attempts})
    if real:
        res = _real_constants(res)
    return res


def _real_constants(res: FPSResult) -> FPSResult:
    """Replace the constant and explicit terms by their real parts."""
    def re(c):
        return sp.simplify(sp.re(c)) if c.has(sp.I) else c

    return res.map(
        terms=[(e, re(c)) for e, c in res.terms], constant=re(sp.sympify(res.constant))
    ).normalised()
