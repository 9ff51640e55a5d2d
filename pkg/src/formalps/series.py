"""Closed-form Laurent-Puiseux series results.

A result is a finite list of :class:`PowerSum` objects
``sum_{k>=0} c(k) x^((m*k + r)/n + s)``, finitely many explicit terms,
``c*x^e*ln(x)`` terms and a constant.  Exponent maps are stored
structurally, so extracting the coefficient of a given power inverts the
map exactly instead of pattern-matching the formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import mpmath
import sympy as sp

from .errors import DomainError, LeadingCoefficientZeroError
from .printing import expr_to_prefix, expr_to_text
from .recurrence import K



def pochhammer(a, k):
    """Rising factorial ``(a)_k``; ``(a)_0 = 1``."""
    return sp.RisingFactorial(a, k)


def eval_at(expr, k):
    """Exact value of a coefficient formula at an integer ``k``."""
    v = sp.sympify(expr).xreplace({K: sp.Integer(k)})
    if v.has(sp.Product, sp.Sum, sp.RootSum, sp.RisingFactorial):
        v = v.doit()
    if v.has(sp.cos, sp.sin):
        v = sp.expand_trig(v)
    return sp.simplify(v) if not v.is_Rational else v


@dataclass(frozen=True)
class PowerSum:
    """``sum_{k>=0} coefficient(k) * x^((m*k + r)/n + s)``."""

    coefficient: sp.Expr
    m: int = 1
    n: int = 1
    r: int = 0
    s: sp.Expr = sp.Integer(0)
    origin: object = field(default=None, compare=False, hash=False, repr=False)

    def exponent(self, k=K):
        return (self.m * sp.sympify(k) + self.r) / sp.Integer(self.n) + self.s

    def index_of(self, e):
        """Summation index hitting exponent ``e``, or ``None``."""
        t = (sp.sympify(e) - self.s) * self.n - self.r
        t = sp.simplify(t)
        if not t.is_Integer or t % self.m:
            return None
        k = int(t) // self.m
        return k if k >= 0 else None

    def coefficient_at(self, k):
        return eval_at(self.coefficient, k)

    def shifted(self, t):
        """Multiply by ``x^t``."""
        return replace(self, s=sp.sympify(self.s + t))

    def rooted(self, d):
        """Substitute ``x -> x^(1/d)``."""
        return replace(self, n=self.n * d, s=sp.sympify(self.s) / d)

    def scaled(self, c):
        return replace(self, coefficient=sp.sympify(c) * self.coefficient, origin=None)

    def drop_first(self):
        """Sum without its ``k = 0`` term."""
        if self.origin is not None:
            coeff, origin = self.origin.tail()
            return replace(self, coefficient=coeff, r=self.r + self.m, origin=origin)
        return replace(self, coefficient=self.coefficient.subs(K, K + 1), r=self.r + self.m)

    def as_expr(self, x):
        return sp.Sum(self.coefficient * x ** self.exponent(K), (K, 0, sp.oo))


@dataclass(frozen=True)
class FPSResult:
    """Finite combination of sums, explicit terms, log terms and a constant."""

    sums: tuple = ()
    terms: tuple = ()  # (exponent, coefficient)
    logs: tuple = ()  # (coefficient, exponent): coefficient * x^exponent * ln(x)
    constant: sp.Expr = sp.Integer(0)
    point: sp.Expr = sp.Integer(0)
    direction: str = "right"
    validity: str = ""
    var: sp.Symbol = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    # -- transformations -------------------------------------------------
    def map(self, sums=None, terms=None, logs=None, constant=None, **kw):
        return replace(
            self,
            sums=tuple(self.sums if sums is None else sums),
            terms=tuple(self.terms if terms is None else terms),
            logs=tuple(self.logs if logs is None else logs),
            constant=self.constant if constant is None else constant,
            **kw,
        )

    def shifted(self, t):
        """Multiply by ``x^t``; the constant becomes an explicit term."""
        t = sp.sympify(t)
        terms = [(e + t, c) for e, c in self.terms]
        if self.constant != 0:
            terms.append((t, self.constant))
        return self.map(
            [p.shifted(t) for p in self.sums],
            terms,
            [(c, e + t) for c, e in self.logs],
            sp.Integer(0),
        ).normalised()

    def rooted(self, d):
        """Substitute ``x -> x^(1/d)``."""
        return self.map(
            [p.rooted(d) for p in self.sums],
            [(e / d, c) for e, c in self.terms],
            [(c / d, e / d) for c, e in self.logs],
        )

    def scaled(self, c):
        return self.map(
            [p.scaled(c) for p in self.sums],
            [(e, c * v) for e, v in self.terms],
            [(c * v, e) for v, e in self.logs],
            c * self.constant,
        )

    def __add__(self, other):
        return self.map(
            list(self.sums) + list(other.sums),
            list(self.terms) + list(other.terms),
            list(self.logs) + list(other.logs),
            self.constant + other.constant,
        ).normalised()

    def normalised(self):
        """Merge equal exponents and move an ``x^0`` explicit term into the constant."""
        acc = {}
        const = sp.sympify(self.constant)
        for e, c in self.terms:
            e = sp.sympify(e)
            if e == 0:
                const += c
            else:
                acc[e] = acc.get(e, 0) + c
        terms = [(e, sp.simplify(c)) for e, c in acc.items() if sp.simplify(c) != 0]
        terms.sort(key=lambda t: _exp_key(t[0]))
        lacc = {}
        for c, e in self.logs:
            lacc[e] = lacc.get(e, 0) + c
        logs = [(sp.simplify(c), e) for e, c in lacc.items() if sp.simplify(c) != 0]
        logs.sort(key=lambda t: _exp_key(t[1]))
        return replace(
            self, terms=tuple(terms), logs=tuple(logs), constant=sp.simplify(const)
        )

    # -- inspection ------------------------------------------------------
    def is_zero(self):
        return not self.sums and not self.terms and not self.logs and self.constant == 0

    def is_one_sided(self):
        """True if some exponent is not an integer or a log term is present."""
        if self.logs:
            return True
        if any(not sp.sympify(e).is_integer for e, _ in self.terms):
            return True
        return any(
            not sp.sympify(p.s).is_integer or p.m % p.n or p.r % p.n for p in self.sums
        )

    def as_expr(self, x=None):
        x = x or self.var
        out = self.constant
        for e, c in self.terms:
            out += c * x**e
        for c, e in self.logs:
            out += c * x**e * sp.log(x)
        for p in self.sums:
            out += p.as_expr(x)
        return out


def _exp_key(e):
    e = sp.sympify(e)
    try:
        return (0, float(e), str(e))
    except TypeError:
        return (1, 0.0, str(e))


def eval_coefficient(r: FPSResult, exponent):
    """Coefficient of ``x^exponent`` (log terms excluded), exactly.

    >>> import sympy as sp
    >>> res = FPSResult(sums=(PowerSum((-1)**K/sp.factorial(2*K + 1), 2, 1, 1),))
    >>> eval_coefficient(res, 3)
    -1/6
    """
    e = sp.sympify(exponent)
    total = sp.Integer(0)
    if e == 0:
        total += r.constant
    for te, c in r.terms:
        if sp.simplify(te - e) == 0:
            total += c
    for p in r.sums:
        k = p.index_of(e)
        if k is not None:
            total += p.coefficient_at(k)
    return sp.simplify(total)


def eval_log_coefficient(r: FPSResult, exponent):
    e = sp.sympify(exponent)
    return sp.simplify(sum((c for c, le in r.logs if sp.simplify(le - e) == 0), sp.Integer(0)))


def stream_coefficients(re, seeds):
    """Lazily iterate a recurrence from initial values.

    ``seeds`` are ``a_0, ..., a_{L-1}``; negative indices count as zero.
    Coefficient ``a_j`` for ``j >= L`` comes from the recurrence at
    normalised index ``j - order``; a vanishing leading coefficient there
    raises ``LeadingCoefficientZeroError`` naming both indices.
    """
    seeds = [sp.sympify(s) for s in seeds]
    known = list(seeds)
    order = re.order
    lead = re.leading()
    rest = {e: c for e, c in re.coeffs.items() if e != order and c != 0}

    def a(i):
        return known[i] if i >= 0 else sp.Integer(0)

    for v in seeds:
        yield v
    j = len(seeds)
    while True:
        kk = j - order
        lv = lead.subs(K, kk)
        if lv == 0:
            raise LeadingCoefficientZeroError(
                f"leading coefficient vanishes at index {j}",
                index=j,
                k=kk - re.shift,
            )
        acc = sp.Add(*[c.subs(K, kk) * a(kk + e) for e, c in rest.items()])
        v = sp.cancel(-acc / lv)
        known.append(v)
        yield v
        j += 1


def _local_point(r: FPSResult, x0):
    """Map a value of the original variable to the expansion variable."""
    x0 = sp.sympify(x0)
    p = r.point
    if p == sp.oo:
        return 1 / x0
    if p == -sp.oo:
        return -1 / x0
    return (p - x0) if r.direction == "left" else (x0 - p)


def partial_sum(r: FPSResult, N, x0, digits=30):
    """First ``N`` terms of every sum plus all finite parts, at ``x0``.

    The evaluation uses ``digits`` significant digits.  One-sided results
    reject points on the wrong side of the expansion point.
    """
    t = sp.sympify(_local_point(r, x0))
    if t < 0 and r.direction != "both":
        raise DomainError(f"point {x0} lies outside the one-sided domain of validity")
    if t == 0 and (r.logs or any(sp.sympify(e).is_negative for e, _ in r.terms)):
        raise DomainError("evaluation at the expansion point")
    with mpmath.workdps(digits + 10):

        def num(c):
            return mpmath.mpmathify(sp.N(c, digits + 10))

        tv = num(t)

        def power(e):
            e = sp.sympify(e)
            return tv ** int(e) if e.is_Integer else mpmath.power(tv, num(e))

        total = num(r.constant)
        for e, c in r.terms:
            total += num(c) * power(e)
        for c, e in r.logs:
            total += num(c) * power(e) * mpmath.log(tv)
        for p in r.sums:
            for k in range(N):
                c = p.coefficient_at(k)
                if c != 0:
                    total += num(c) * power(p.exponent(k))
    with mpmath.workdps(digits):
        return +total


# ---------------------------------------------------------------------------
# rendering


def _term_text(c, e, x="x", log=False):
    e = sp.sympify(e)
    mono = ""
    if e != 0:
        es = expr_to_text(e)
        if not (e.is_Integer and e > 0) and not e.is_Symbol:
            es = f"({es})"
        mono = x if e == 1 else f"{x}^{es}"
    if log:
        mono = f"{mono}*ln({x})" if mono else f"ln({x})"
    if not mono:
        return expr_to_text(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    cs = expr_to_text(c)
    if isinstance(c, sp.Add):
        cs = f"({cs})"
    return f"{cs}*{mono}"


def _sum_text(p: PowerSum, xname):
    kx = sp.Symbol("k")
    x = sp.Symbol(xname, positive=True)
    e = p.exponent(K)
    body = p.coefficient * x**e
    body = body.subs(K, kx)
    return f"Sum({expr_to_text(body)}, k=0..infinity)"


def render(r: FPSResult, fmt="text", var=None):
    """Deterministic text or structured rendering of a result.

    >>> import sympy as sp
    >>> res = FPSResult(sums=(PowerSum((-1)**K/sp.factorial(2*K + 1), 2, 1, 1),))
    >>> render(res)
    'Sum((-1)^k*x^(2*k+1)/(2*k+1)!, k=0..infinity)'
    """
    name = str(var or r.var or "x")
    if fmt == "structured":
        return render_structured(r, name)
    xs = name
    if r.point == sp.oo:
        xs = f"(1/{name})"
    elif r.point == -sp.oo:
        xs = f"(-1/{name})"
    elif r.point != 0:
        p = r.point
        xs = f"({name}-{expr_to_text(p)})" if r.direction != "left" else f"({expr_to_text(p)}-{name})"
    elif r.direction == "left":
        xs = f"(-{name})"
    parts = []
    if r.constant != 0:
        parts.append(expr_to_text(r.constant))
    for c, e in r.logs:
        parts.append(_term_text(c, e, xs, log=True))
    for e, c in r.terms:
        parts.append(_term_text(c, e, xs))
    for p in r.sums:
        s = _sum_text(p, "X_")
        parts.append(s.replace("X_", xs))
    if not parts:
        return "0"
    out = parts[0]
    for q in parts[1:]:
        out += q if q.startswith("-") else "+" + q
    return out


def _exp_map(m, n, r, s):
    return {"m": int(m), "n": int(n), "r": int(r) if sp.sympify(r).is_Integer else expr_to_prefix(r),
            "s": expr_to_prefix(s)}


def render_structured(r: FPSResult, var="x"):
    comps = []
    if r.constant != 0:
        comps.append({"kind": "const", "exponent_map": _exp_map(0, 1, 0, 0),
                      "coefficient": expr_to_prefix(r.constant)})
    for c, e in r.logs:
        comps.append({"kind": "log", "exponent_map": _exp_map(0, 1, 0, e),
                      "coefficient": expr_to_prefix(c)})
    for e, c in r.terms:
        comps.append({"kind": "term", "exponent_map": _exp_map(0, 1, 0, e),
                      "coefficient": expr_to_prefix(c)})
    for p in r.sums:
        comps.append({"kind": "sum", "exponent_map": _exp_map(p.m, p.n, p.r, p.s),
                      "coefficient": expr_to_prefix(p.coefficient)})
    point = r.point
    doc = {
        "variable": var,
        "point": "infinity" if point == sp.oo else "-infinity" if point == -sp.oo else expr_to_prefix(point),
        "direction": r.direction,
        "components": comps,
    }
    return json.dumps(doc, sort_keys=True)
