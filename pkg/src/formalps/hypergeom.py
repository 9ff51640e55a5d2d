"""Solving two-term recurrences ``Q(k) a_{k+m} = P(k) a_k``.

The solver brings the recurrence into a standard shape by a sequence of
invertible transformations of the function:

* ``f(x) -> f(x^n)`` (rational roots of ``P``, ``Q`` become integers),
* ``f -> x^t f`` (the series starts at ``x^0``),
* ``f -> (x^t f)'`` (a logarithmic singularity is differentiated away),

computes initial values by limits and assembles closed-form coefficients
from the factorisations of ``P`` and ``Q``.  Each transformation is undone
on the structured result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import sympy as sp

from .arith import lcm_list, rational_roots
from .errors import (
    EssentialSingularityError,
    FPSError,
    LimitUndecidedError,
    NotTwoTermError,
    TuningFailedError,
)
from .limits import limit_at_zero, series_coefficients
from .recurrence import RE, K
from .series import FPSResult, PowerSum

log = logging.getLogger("formalps.hypergeom")

J = sp.Symbol("j", integer=True, nonnegative=True)
_MAX_LOG_DEPTH = 3


@dataclass(frozen=True)
class HypergeomRE:
    """``Q(k) a_{k+m} = P(k) a_k``, possibly failing at ``exceptional`` indices."""

    m: int
    P: sp.Expr
    Q: sp.Expr
    exceptional: tuple = ()

    def ratio(self):
        return self.P / self.Q

    def __str__(self):
        return (
            f"{_paren(self.Q)}*a(k+{self.m}) = {_paren(self.P)}*a(k)"
        )

    def holds_for(self, seq, k):
        return sp.simplify(self.Q.subs(K, k) * seq(k + self.m) - self.P.subs(K, k) * seq(k)) == 0

    # argument transformations --------------------------------------------
    def times_power(self, t):
        """Recurrence of ``x^t f``."""
        return _make(
            self.m,
            self.P.subs(K, K - t),
            self.Q.subs(K, K - t),
            [z + t for z in self.exceptional],
        )

    def argument_scaled(self, A):
        """Recurrence of ``f(A x)``."""
        return _make(self.m, sp.sympify(A) ** self.m * self.P, self.Q, self.exceptional)

    def argument_power(self, n):
        """Recurrence of ``f(x^n)``."""
        return _make(
            self.m * n,
            self.P.subs(K, K / sp.Integer(n)),
            self.Q.subs(K, K / sp.Integer(n)),
            [z * n for z in self.exceptional],
        )

    def derivative(self):
        """Recurrence of ``f'``."""
        m = self.m
        return _make(
            m,
            (K + m + 1) * self.P.subs(K, K + 1),
            (K + 1) * self.Q.subs(K, K + 1),
            [z - 1 for z in self.exceptional],
        )


def _paren(e):
    from .printing import expr_to_text

    e = sp.factor(e)
    txt = expr_to_text(e)
    return f"({txt})" if isinstance(e, sp.Add) else txt


@dataclass
class TransformTrace:
    steps: list = field(default_factory=list)

    def add(self, name, value):
        self.steps.append((name, value))
        log.info("transform %s %s", name, value)


def _primitive(e):
    """Clear denominators; return ``(scale, polynomial)`` with ``e = polynomial / scale``."""
    e = sp.cancel(sp.together(sp.expand(e)))
    n, d = sp.fraction(e)
    return d, sp.expand(n)


def _make(m, P, Q, exceptional=()):
    """Normalised recurrence: coprime integer-coefficient ``P``, ``Q``, positive ``Q`` leading term."""
    P = sp.cancel(sp.together(sp.sympify(P)))
    Q = sp.cancel(sp.together(sp.sympify(Q)))
    R = sp.cancel(P / Q)
    exc = set(sp.sympify(z) for z in exceptional)
    g = sp.gcd(sp.expand(sp.fraction(P)[0] * sp.fraction(Q)[1]),
               sp.expand(sp.fraction(Q)[0] * sp.fraction(P)[1]))
    if g.has(K):
        exc |= {r for r, _ in rational_roots(sp.Poly(g, K), K)}
    num, den = sp.fraction(R)
    num, den = sp.expand(num), sp.expand(den)
    if den.has(K):
        lc = sp.Poly(den, K).LC()
    else:
        lc = den
    if sp.sympify(lc).could_extract_minus_sign():
        num, den = -num, -den
    return HypergeomRE(int(m), num, den, tuple(sorted(exc, key=lambda z: (float(z), str(z)))))


def _from_two_terms(lo, c_lo, hi, c_hi, exceptional_rows=()):
    return _make(
        hi - lo,
        -c_lo.subs(K, K - lo),
        c_hi.subs(K, K - lo),
        [z + lo for z in exceptional_rows],
    )


def _row_roots(factors):
    out = []
    for g in factors:
        if sp.sympify(g).has(K):
            out += [r for r, _ in rational_roots(sp.Poly(g, K), K)]
    return out


def detect_hypergeometric(re: RE) -> HypergeomRE:
    """Read off ``m``, ``P``, ``Q`` from a recurrence with at most two terms."""
    if re.is_parametric():
        raise NotTwoTermError("recurrence still has free parameters", obj=re)
    base = re.cancel_content()
    rows = _row_roots(base.removed_factors[len(re.removed_factors):])
    offs = base.offsets
    if len(offs) == 1:
        e = offs[0]
        c = base.coeffs[e]
        return _make(1, sp.Integer(0), c.subs(K, K + 1 - e), [z + e - 1 for z in rows] + _row_roots([c]))
    if len(offs) != 2:
        raise NotTwoTermError(f"recurrence has {len(offs)} terms", obj=re)
    lo, hi = offs
    return _from_two_terms(lo, base.coeffs[lo], hi, base.coeffs[hi], rows)


# ---------------------------------------------------------------------------
# tuning


def _pairs(offsets):
    lo, hi = offsets[0], offsets[-1]
    rest = [(a, b) for i, a in enumerate(offsets) for b in offsets[i + 1:] if (a, b) != (lo, hi)]
    rest.sort(key=lambda p: (p[1] - p[0], p[0]))
    return [(lo, hi)] + rest


def _affine_parts(c, params):
    c = sp.expand(c)
    const = c.subs({p: 0 for p in params})
    return sp.expand(const), [sp.expand(c.coeff(p)) for p in params]


def validate(h: HypergeomRE, f, var, count=None):
    """Check the recurrence against independently computed series coefficients."""
    deg = max(sp.Poly(h.P, K).degree() if h.P.has(K) else 0,
              sp.Poly(h.Q, K).degree() if h.Q.has(K) else 0)
    count = count or 2 * h.m + deg + 4
    try:
        coeffs = series_coefficients(f, var, count + h.m + 2)
    except Exception as exc:  # sympy's series may fail on exotic input
        log.debug("validation series failed: %s", exc)
        return False
    if any(c.has(sp.log) for c in coeffs.values()):
        return False
    if not coeffs:
        return True
    v = min(coeffs)
    top = count + h.m + 2  # the series is exact below this exponent
    exc = set(h.exceptional)
    checked = 0
    base = [e for e in coeffs]
    starts = sorted({e - sp.floor(e) for e in base})
    for frac in starts:
        k = sp.floor(v) - h.m + frac
        while k + h.m < top:
            if k not in exc:
                lhs = h.Q.subs(K, k) * coeffs.get(k + h.m, 0) - h.P.subs(K, k) * coeffs.get(k, 0)
                if sp.simplify(lhs) != 0:
                    return False
                checked += 1
            k += 1
    return checked > 0


def tune_two_term(re: RE, f, var):
    """Choose the free parameters (as functions of ``k``) so two terms remain.

    Returns ``(assignment, HypergeomRE)``.  Each parameter component of a
    parametric recurrence is itself a valid recurrence, so the result is a
    polynomial combination of valid recurrences; it is still checked against
    series coefficients before being accepted.
    """
    if not re.is_parametric():
        return {}, detect_hypergeometric(re)
    params = [p for p in re.params if any(c.has(p) for c in re.coeffs.values())]
    offs = re.offsets
    for lo, hi in _pairs(offs):
        others = [e for e in offs if e not in (lo, hi)]
        rows, rhs = [], []
        for e in others:
            const, lin = _affine_parts(re.coeffs[e], params)
            rows.append(lin)
            rhs.append(-const)
        from .arith import solve_linear
        from .errors import InconsistentSystemError

        try:
            space = solve_linear(rows, rhs, [p.name for p in params]) if rows else None
        except InconsistentSystemError:
            continue
        values = dict(zip(params, space.particular)) if space else {}
        c_lo = sp.cancel(re.coeffs[lo].xreplace(values))
        c_hi = sp.cancel(re.coeffs[hi].xreplace(values))
        if c_lo == 0 or c_hi == 0:
            continue
        d_lo, n_lo = _primitive(c_lo)
        d_hi, n_hi = _primitive(c_hi)
        den = sp.lcm(d_lo, d_hi)
        n_lo = sp.expand(sp.cancel(c_lo * den))
        n_hi = sp.expand(sp.cancel(c_hi * den))
        g = sp.gcd(n_lo, n_hi)
        rows_exc = _row_roots([g]) if g.has(K) else []
        h = _from_two_terms(lo, sp.cancel(n_lo / g), hi, sp.cancel(n_hi / g), rows_exc)
        log.info("tuning keeps offsets %s, %s: %s", lo, hi, h)
        if validate(h, f, var):
            return {p.name: sp.factor(v) for p, v in values.items()}, h
        log.info("tuned recurrence rejected by validation")
    raise TuningFailedError("no two-term choice of the parameters", obj=re)


# ---------------------------------------------------------------------------
# normalisation


def puiseux_normalize(h: HypergeomRE):
    """``(n, recurrence of f(x^n))`` with ``n`` the lcm of root denominators."""
    dens = []
    for poly in (h.P, h.Q):
        if poly != 0 and sp.sympify(poly).has(K):
            dens += [r.q for r, _ in rational_roots(sp.Poly(poly, K), K)]
    dens += [sp.Rational(z).q for z in h.exceptional if sp.sympify(z).is_Rational]
    n = int(lcm_list([sp.Integer(d) for d in dens])) if dens else 1
    if n == 1:
        return 1, h
    return n, h.argument_power(n)


def _integer_roots(poly):
    if poly == 0 or not sp.sympify(poly).has(K):
        return []
    return [int(r) for r, _ in rational_roots(sp.Poly(poly, K), K) if r.is_Integer]


def laurent_normalize(h: HypergeomRE, f, var, direction="right"):
    """Shift so that the series starts at ``x^0``.

    Returns ``(s, recurrence of g, g)`` with ``g = x^(-s) f``.
    """
    roots = _integer_roots(h.Q)
    s = (min(roots) + h.m) if roots else 0
    g = sp.powsimp(f * var ** (-s)) if s else f
    hg = h.times_power(-s) if s else h
    lim = limit_at_zero(var * g, var, direction)
    if lim.value != 0:
        raise EssentialSingularityError(
            f"no Laurent-Puiseux expansion: x*g tends to {lim.value}", obj=f
        )
    return s, hg, g


# ---------------------------------------------------------------------------
# closed forms


def _gauss_groups(bases):
    """Group rational bases ``a, a+1/d, ..., a+(d-1)/d`` with ``d*a`` a positive integer.

    Returns ``(groups, rest)`` where each group is ``(d, a)``.
    """
    pool = list(bases)
    groups = []
    rats = [b for b in pool if b.is_Rational]
    maxd = max([b.q for b in rats] + [1])
    for d in range(maxd, 1, -1):
        changed = True
        while changed:
            changed = False
            for a in sorted(set(b for b in pool if b.is_Rational)):
                if not (d * a).is_Integer or d * a <= 0:
                    continue
                need = [a + sp.Rational(i, d) for i in range(d)]
                tmp = list(pool)
                ok = True
                for b in need:
                    if b in tmp:
                        tmp.remove(b)
                    else:
                        ok = False
                        break
                if ok:
                    pool = tmp
                    groups.append((d, a))
                    changed = True
                    break
    return groups, pool


def _rising_closed(b, j):
    """``(b)_j`` via factorials when ``b`` is a positive integer or half-integer."""
    if b.is_Integer and b > 0:
        return sp.factorial(j + b - 1) / sp.factorial(b - 1)
    if b.is_Rational and b > 0 and b.q == 2:
        # duplication: (b)_j (b+1/2)_j = (2b)_{2j} / 4^j
        c = int(2 * b)
        return (sp.factorial(2 * j + c - 1) / sp.factorial(c - 1)
                / (sp.Integer(4) ** j * _rising_closed(b + sp.S.Half, j)))
    return sp.RisingFactorial(b, j)


def _pair_off(num, den, j, limit=8):
    """Cancel ``(b + t)_j / (b)_j`` pairs with a small integer ``t`` into rational factors."""
    factor = sp.Integer(1)
    changed = True
    while changed:
        changed = False
        for a in num:
            for b in den:
                t = sp.simplify(a - b)
                if t.is_Integer and 0 < abs(t) <= limit:
                    num.remove(a)
                    den.remove(b)
                    if t > 0:
                        factor *= sp.Mul(*[(b + j + i) / (b + i) for i in range(int(t))])
                    else:
                        factor *= sp.Mul(*[(a + i) / (a + j + i) for i in range(int(-t))])
                    changed = True
                    break
            if changed:
                break
    return factor


def _collect(poly, kstar, m, sign, state):
    """Split ``prod_{i<j} poly(k* + i m)`` into geometric, Pochhammer and product parts."""
    if poly == 0:
        raise ValueError("zero factor")
    const, facs = sp.factor_list(sp.expand(poly), K)
    state["geo"] *= const**sign
    for fac, mult in facs:
        p = sp.Poly(fac, K)
        if p.degree() == 1:
            a1, a0 = p.all_coeffs()
            root = -a0 / a1
            state["geo"] *= (a1 * m) ** (sign * mult)
            base = sp.simplify((kstar - root) / m)
            state["num" if sign > 0 else "den"] += [base] * mult
        else:
            shifted = sp.Poly(sp.expand(fac.subs(K, kstar + m * J)), J)
            lc = shifted.LC()
            state["geo"] *= lc ** (sign * mult)
            monic = sp.expand(shifted.as_expr() / lc)
            state["prod"].append((monic, sign * mult))


def assemble_coefficient(seed, kstar, h: HypergeomRE):
    """Closed form of ``a_{k* + m j}`` in terms of ``j`` (returned in the symbol ``k``).

    Linear factors become Pochhammer symbols, complete residue sets combine
    into factorials by Gauss multiplication, and irreducible factors remain
    finite products.
    """
    m = h.m
    state = {"geo": sp.Integer(1), "num": [], "den": [], "prod": []}
    _collect(h.P, kstar, m, 1, state)
    _collect(h.Q, kstar, m, -1, state)
    num, den = list(state["num"]), list(state["den"])
    for b in list(num):
        if b in den:
            num.remove(b)
            den.remove(b)
    j = K
    expr = sp.sympify(seed) * state["geo"] ** j * sp.factor(_pair_off(num, den, j))
    for lst, sgn in ((num, 1), (den, -1)):
        groups, rest = _gauss_groups(lst)
        for d, a in groups:
            da = int(d * a)
            part = sp.factorial(d * j + da - 1) / sp.factorial(da - 1) / sp.Integer(d) ** (d * j)
            expr *= part**sgn
        for b in rest:
            expr *= _rising_closed(b, j) ** sgn
    for monic, e in state["prod"]:
        expr *= sp.Product(monic, (J, 0, j - 1)) ** e
    return _merge_geometric(expr, j)


def _merge_geometric(expr, j):
    """Collect every ``b^(a*j + c)`` with rational ``b`` and integer ``a`` into one ``G^j``."""
    if not isinstance(expr, sp.Mul):
        return expr
    G, rest = sp.Integer(1), []
    for fac in expr.args:
        b, e = fac.as_base_exp()
        if b.is_Rational and e.has(j):
            poly = sp.Poly(e, j) if e.is_polynomial(j) else None
            if poly is not None and poly.degree() == 1:
                a, c = poly.all_coeffs()
                if a.is_Integer and c.is_Rational:
                    G *= b**a
                    rest.append(b**c)
                    continue
        rest.append(fac)
    if G == 1:
        return sp.Mul(*rest)
    return sp.Mul(*rest) * sp.Pow(G, j)


# ---------------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class _Origin:
    """How a sum was built, so that its tail can be re-assembled in closed form."""

    seed: sp.Expr
    kstar: int
    h: HypergeomRE

    def tail(self):
        h = self.h
        seed = sp.simplify(self.seed * h.P.subs(K, self.kstar) / h.Q.subs(K, self.kstar))
        nxt = _Origin(seed, self.kstar + h.m, h)
        return assemble_coefficient(seed, nxt.kstar, h), nxt


class _InfiniteSeed(Exception):
    def __init__(self, k):
        super().__init__(k)
        self.k = k


class _Seeds:
    """Lazily computed ``lim g^(k)/k!``."""

    def __init__(self, g, var, direction):
        self.g, self.var, self.direction = g, var, direction
        self.values = []
        self.der = g

    def __call__(self, k):
        if k < 0:
            return sp.Integer(0)
        while len(self.values) <= k:
            i = len(self.values)
            if i:
                self.der = sp.diff(self.der, self.var)
            lv = limit_at_zero(self.der, self.var, self.direction)
            if not lv.is_finite:
                raise _InfiniteSeed(i)
            v = sp.simplify(lv.value / sp.factorial(i))
            log.info("a(%d) = %s", i, v)
            self.values.append(v)
        return self.values[k]


def solve_hypergeometric(h: HypergeomRE, g, var, direction="right", seeds=None) -> FPSResult:
    """Series of ``g`` (no pole at 0) from its recurrence and initial values.

    Raises ``_InfiniteSeed`` when an initial value diverges.
    """
    m = h.m
    seeds = seeds or _Seeds(g, var, direction)
    q_roots = _integer_roots(h.Q)
    p_roots = set(_integer_roots(h.P)) if h.P != 0 else None
    exc = [int(z) for z in h.exceptional if sp.sympify(z).is_Integer and z >= 0]
    # an exceptional index is harmless if the relation holds there
    bad = set(q_roots)
    for z in exc:
        if z in bad:
            continue
        if h.Q.subs(K, z) == 0 or not h.holds_for(seeds, z):
            bad.add(z)
    terms, sums = [], []
    for r in range(m):
        kstar = r
        for z in bad:
            if (z - r) % m == 0:
                kstar = max(kstar, z + m)
        for i in range(r, kstar, m):
            v = seeds(i)
            if v != 0:
                terms.append((sp.Integer(i), v))
        a = seeds(kstar)
        if a == 0:
            continue
        stop = None
        if p_roots is None:
            stop = kstar
        else:
            hits = [z for z in p_roots if z >= kstar and (z - kstar) % m == 0]
            if hits:
                stop = min(hits)
        if stop is not None:
            v = a
            for i in range(kstar, stop + 1, m):
                if v != 0:
                    terms.append((sp.Integer(i), sp.simplify(v)))
                v = v * h.P.subs(K, i) / h.Q.subs(K, i)
            continue
        coeff = assemble_coefficient(a, kstar, h)
        sums.append(PowerSum(coeff, m, 1, kstar, sp.Integer(0), origin=_Origin(a, kstar, h)))
    return FPSResult(tuple(sums), tuple(terms), var=var, direction=direction).normalised()


def solve_function(h: HypergeomRE, f, var, direction="right", depth=0, trace=None) -> FPSResult:
    """Full solve: Puiseux and Laurent normalisation, seeds, log singularities."""
    trace = trace if trace is not None else TransformTrace()
    n, h1 = puiseux_normalize(h)
    g = f
    if n > 1:
        trace.add("argument-root", n)
        g = sp.powsimp(sp.powdenest(f.subs(var, var**n), force=True))
        log.info("RE modified by k = k/%d: %s", n, h1)
    s, h2, g2 = laurent_normalize(h1, g, var, direction)
    if s:
        trace.add("power-shift", -s)
        log.info("working with x^%s*f -> %s", -s, g2)
    try:
        res = solve_hypergeometric(h2, g2, var, direction)
    except _InfiniteSeed as inf:
        trace.add("derivative", inf.k)
        res = handle_log_singularity(g2, var, inf.k, h2, direction, depth, trace)
    if s:
        res = res.shifted(s)
    if n > 1:
        res = res.rooted(n)
    return res.map(meta={"trace": list(trace.steps)} | dict(res.meta))


def integrate_result(res: FPSResult, var) -> FPSResult:
    """Termwise antiderivative without constant; ``1/x`` integrates to ``ln x``.

    Leading sum terms with exponent ``<= -1`` are split off as explicit
    terms first, so every remaining sum integrates without division by zero.
    """
    sums, terms, logs = [], [], []
    pending = list(res.terms)
    if res.constant != 0:
        pending.append((sp.Integer(0), res.constant))
    for p in res.sums:
        while True:
            e0 = p.exponent(0)
            if not (e0.is_number and e0 <= -1):
                break
            c0 = p.coefficient_at(0)
            if c0 != 0:
                pending.append((e0, c0))
            p = p.drop_first()
        e = p.exponent(K)
        c = p.coefficient / (e + 1)
        sums.append(PowerSum(c if c.has(sp.I) else sp.factor(c), p.m, p.n, p.r, p.s + 1))
    for e, c in pending:
        if e == -1:
            logs.append((c, sp.Integer(0)))
        else:
            terms.append((e + 1, c / (e + 1)))
    for c, e in res.logs:
        if e == -1:
            raise FPSError("integration would produce ln(x)^2", stage="re-solve")
        # int x^e ln x = x^(e+1) ln x/(e+1) - x^(e+1)/(e+1)^2
        logs.append((c / (e + 1), e + 1))
        terms.append((e + 1, -c / (e + 1) ** 2))
    return FPSResult(tuple(sums), tuple(terms), tuple(logs), var=var,
                     direction=res.direction).normalised()


def singular_part(res: FPSResult, var):
    """Terms that do not vanish at ``0+``: logs and negative powers."""
    out = sp.Integer(0)
    for c, e in res.logs:
        out += c * var**e * sp.log(var)
    for e, c in res.terms:
        if sp.sympify(e).is_number and e < 0:
            out += c * var**e
    return out


def handle_log_singularity(g, var, k0, h: HypergeomRE, direction="right", depth=0, trace=None):
    """Series of ``g`` when its ``k0``-th initial value diverges.

    Works with ``(x^(-k0) g)'``, whose recurrence follows from shifting and
    differentiating, integrates the result termwise and restores the
    constant by a limit.
    """
    if depth >= _MAX_LOG_DEPTH:
        raise LimitUndecidedError("nested logarithmic singularities", obj=g)
    c = sp.powsimp(var ** (-k0) * g) if k0 else g
    hc = h.times_power(-k0) if k0 else h
    d = sp.simplify(sp.diff(c, var))
    hd = hc.derivative()
    log.info("logarithmic singularity at a(%d); working with (x^%d f)' -> %s", k0, -k0, d)
    res_d = solve_function(hd, d, var, direction, depth + 1, trace)
    integ = integrate_result(res_d, var)
    const = limit_at_zero(sp.expand(c - singular_part(integ, var)), var, direction)
    if not const.is_finite:
        raise LimitUndecidedError("integration constant diverges", obj=c)
    res = integ.map(constant=integ.constant + sp.simplify(const.value)).normalised()
    return res.shifted(k0) if k0 else res
