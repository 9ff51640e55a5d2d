"""Acceptance gate.

Every test below checks one acceptance criterion item and records the
outcome in ``ACCEPTANCE_RESULTS``; ``conftest.py`` prints one line per
item at the end of the run.  Reference values come from the independent
truncated-series oracle (``formalps.oracle``) unless stated otherwise.
"""

import functools
import time

import mpmath
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from formalps.errors import DomainError, EssentialSingularityError
from formalps.explike import tune_constant_coefficients
from formalps.expr import lookup
from formalps.oracle import truncated_series
from formalps.pipeline import LOCAL, formal_power_series
from formalps.recurrence import K, convert_de_to_re
from formalps.series import eval_coefficient, partial_sum, render, stream_coefficients
from formalps.simple_de import find_lowest_de, find_simple_de

x = sp.Symbol("x")
X = LOCAL
n = sp.Symbol("n")
A, B, C = sp.symbols("A B C")

#: label -> (passed, seconds, detail)
ACCEPTANCE_RESULTS = {}

#: per-item time limit for the golden closed forms
GOLDEN_LIMIT = 5.0
#: total budget of the property suites, and their minimum case count
PROPERTY_BUDGET = 60.0
PROPERTY_CASES = 200
PROPERTY_LABELS = ("5a", "5b", "5c", "5d")


def criterion(label, limit=None):
    """Record pass/fail and wall time of the decorated test under ``label``."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                ACCEPTANCE_RESULTS[label] = (False, time.perf_counter() - t0, type(exc).__name__)
                raise
            dt = time.perf_counter() - t0
            ok = limit is None or dt <= limit
            ACCEPTANCE_RESULTS[label] = (ok, dt, detail or "")
            assert ok, f"{label} took {dt:.2f}s > {limit}s"

        return wrapper

    return deco


def grid_exponents(res, upto):
    """All exponents ``<= upto`` of the result's grid, from its lowest one."""
    den = 1
    for p in res.sums:
        den = sp.ilcm(den, p.n)
    lows = [p.exponent(0) for p in res.sums] + [sp.sympify(e) for e, _ in res.terms] + [0]
    e = sp.Rational(sp.floor(min(lows, key=float)))
    out = []
    while e <= upto:
        out.append(e)
        e += sp.Rational(1, den)
    return out


def matches_oracle(res, f, upto=15):
    """Exact agreement of ``eval_coefficient`` with the oracle at every grid exponent ``<= upto``."""
    ref = truncated_series(f.subs(x, X), X, upto + 1)
    exps = grid_exponents(res, upto)
    for e in exps:
        diff = sp.simplify(eval_coefficient(res, e) - ref.coefficient(e))
        assert diff == 0, (f, e, diff)
    return f"{len(exps)} coefficients exact"


# -- 1. golden closed forms ---------------------------------------------------


@criterion("1 sin x", GOLDEN_LIMIT)
def test_golden_sin():
    r = formal_power_series(sp.sin(x), x)
    assert render(r) == "Sum((-1)^k*x^(2*k+1)/(2*k+1)!, k=0..infinity)"
    return matches_oracle(r, sp.sin(x))


@criterion("1 sin(sqrt x)/x", GOLDEN_LIMIT)
def test_golden_sin_sqrt_over_x():
    f = sp.sin(sp.sqrt(x)) / x
    r = formal_power_series(f, x)
    assert min(p.exponent(0) for p in r.sums) == sp.Rational(-1, 2)
    assert all(p.n == 2 for p in r.sums)
    return matches_oracle(r, f)


@criterion("1 exp(x)sin(x)/x", GOLDEN_LIMIT)
def test_golden_exp_sin_over_x():
    f = sp.exp(x) * sp.sin(x) / x
    r = formal_power_series(f, x)
    assert len(r.sums) == 3
    assert all(p.m == 4 and p.n == 1 for p in r.sums)
    assert sorted(p.exponent(0) % 4 for p in r.sums) == [0, 1, 2]
    detail = matches_oracle(r, f)
    assert all(eval_coefficient(r, 4 * j + 3) == 0 for j in range(4))
    return detail


@criterion("1 x exp(x) sin(2x)", GOLDEN_LIMIT)
def test_golden_x_exp_sin2x():
    f = x * sp.exp(x) * sp.sin(2 * x)
    r = formal_power_series(f, x)
    assert r.meta["method"] == "explike"
    assert r.meta["tuning"] == {"A2": 14, "A3": -4}
    values, _ = tune_constant_coefficients(find_simple_de(f.subs(x, X), X, 4), return_values=True)
    assert values == {"A2": 14, "A3": -4}
    c = r.sums[0].coefficient
    assert c.has(5 ** (K / 2)) and c.has(sp.cos(K * sp.atan(2)))
    return matches_oracle(r, f)


RATIONAL = {
    "1/((x-1)^2(x-2))": 1 / ((x - 1) ** 2 * (x - 2)),
    "(1+x+x^2+x^3)/((x-1)(x-2))": (1 + x + x**2 + x**3) / ((x - 1) * (x - 2)),
    "C/((x-A)(x-B))": C / ((x - A) * (x - B)),
    "x/(1-x-x^2)": x / (1 - x - x**2),
}


@pytest.mark.parametrize("explicit", [True, False], ids=["explicit", "root-sum"])
@pytest.mark.parametrize("name", list(RATIONAL))
def test_golden_rational(name, explicit):
    @criterion(f"1 {name} [{'explicit' if explicit else 'root-sum'}]", GOLDEN_LIMIT)
    def check():
        f = RATIONAL[name]
        r = formal_power_series(f, x, explicit=explicit)
        assert r.meta["method"] == "rational"
        if name.startswith("(1+x"):
            poly = r.constant + sum(c * x**e for e, c in r.terms)
            assert sp.expand(poly - (x + 4)) == 0
        if name == "x/(1-x-x^2)":
            c = r.sums[0].coefficient
            assert c.has(sp.sqrt(5)) if explicit else c.has(sp.RootSum)
        return matches_oracle(r, f)

    check()


@criterion("1 SimpleDE newAi", GOLDEN_LIMIT)
def test_simple_de_newai(newai):
    assert str(find_lowest_de(newai(x), x)) == "F''(x)-x*F(x) = 0"


@criterion("1 SimpleDE Fibonacci(n,x)", GOLDEN_LIMIT)
def test_simple_de_fibonacci():
    de = find_lowest_de(lookup("Fibonacci").cls(n, x), x)
    assert str(de) == "(x^2+4)*F''(x)+3*x*F'(x)-(n-1)*(n+1)*F(x) = 0"


@criterion("1 SimpleRE newAi(x^2)", GOLDEN_LIMIT)
def test_simple_re_newai_squared(newai):
    re = convert_de_to_re(find_lowest_de(newai(x**2), x))
    assert str(re) == "(k-1)*(k+1)*a(k+1)-4*a(k-5) = 0"


@criterion("1 SimpleRE x/(1-x-x^2)", GOLDEN_LIMIT)
def test_simple_re_fibonacci():
    re = convert_de_to_re(find_lowest_de(x / (1 - x - x**2), x))
    assert str(re) == "(1-k)*a(k)+(k-1)*a(k-1)+(k-1)*a(k-2) = 0"


# -- 2. asymptotics -------------------------------------------------------------


@criterion("2 erf at +infinity")
def test_erf_at_infinity():
    r = formal_power_series(sp.erf(x), x, point=sp.oo)
    assert render(r) == "1" and r.constant == 1 and not r.sums


@criterion("2 exp at -infinity")
def test_exp_at_minus_infinity():
    r = formal_power_series(sp.exp(x), x, point=-sp.oo)
    assert render(r) == "0"


@criterion("2 exp at +infinity")
def test_exp_at_infinity():
    with pytest.raises(EssentialSingularityError) as info:
        formal_power_series(sp.exp(x), x, point=sp.oo)
    assert info.value.payload()["error"] == "essential-singularity"


@criterion("2 arctan(1/x) at 0+")
def test_arctan_one_over_x():
    r = formal_power_series(sp.atan(1 / x), x, direction="right")
    assert r.direction == "right" and r.constant == sp.pi / 2
    ref = truncated_series(sp.atan(X), X, 16)
    for e in range(1, 16):
        assert sp.simplify(eval_coefficient(r, e) + ref.coefficient(e)) == 0
    with pytest.raises(DomainError):
        partial_sum(r, 10, sp.Rational(-1, 10), 30)


# -- 3. logarithmic singularity ---------------------------------------------------


@criterion("3 arcsech log term")
def test_arcsech():
    r = formal_power_series(sp.asech(x), x)
    assert list(r.logs) == [(-1, 0)]
    assert r.constant == sp.log(2)
    # the derivative is -1/x plus a power series; integrate that part termwise
    d = truncated_series(sp.diff(sp.asech(X), X), X, 12)
    assert d.coefficient(-1) == -1
    assert eval_coefficient(r, 0) == sp.log(2)
    for j in range(1, 13):
        assert sp.simplify(eval_coefficient(r, j) - d.coefficient(j - 1) / j) == 0


# -- 4. branch agreement ------------------------------------------------------------


@criterion("4 exp(x)sin(x) branches agree")
def test_branch_agreement():
    f = sp.exp(x) * sp.sin(x)
    h = formal_power_series(f, x, method="hypergeometric")
    e = formal_power_series(f, x, method="explike")
    assert h.meta["method"] == "hypergeometric" and e.meta["method"] == "explike"
    for ex in range(13):
        assert sp.simplify(eval_coefficient(h, ex) - eval_coefficient(e, ex)) == 0


# -- 5. property suites -----------------------------------------------------------------

GOLDEN = [
    sp.exp(X), sp.sin(X), sp.cos(X) ** 2, sp.atan(X), sp.log(1 + X), sp.sqrt(1 + X),
    sp.asin(X), sp.erf(X), sp.exp(X) * sp.sin(X), sp.sin(sp.sqrt(X)) / X, sp.asin(X) ** 2,
    X / (1 - X - X**2), sp.cosh(X) * sp.cos(X), sp.exp(-X**2),
]
#: the recurrence indexes integer exponents, so Puiseux inputs are left out
INTEGER_GRID = [f for f in GOLDEN if not f.has(sp.sqrt(X))]
scalings = st.fractions(-3, 3, max_denominator=4).filter(lambda q: q != 0)
PROP = settings(max_examples=PROPERTY_CASES, database=None, derandomize=True)


def _scaled(f, a):
    a = sp.Rational(a.numerator, a.denominator)
    return f.subs(X, a**2 * X) if f.has(sp.sqrt(X)) else f.subs(X, a * X)


def _residual_order(f, de, N=16):
    """Lowest exponent of the DE applied to the oracle series truncated at ``N``."""
    s = truncated_series(f, X, N)
    series = sum(c * X**e for e, c in s.coeffs.items())
    res = sp.expand(sum(c * sp.diff(series, X, j) for j, c in enumerate(de.coefficients)))
    lo = min(s.coeffs) if s.coeffs else 0
    bound = N - de.degree - de.max_coefficient_degree() + lo
    for term in sp.Add.make_args(res):
        if term != 0:
            assert term.as_coeff_exponent(X)[1] >= bound, (f, de, term)


@criterion("5a DE soundness")
def test_property_de_soundness():
    count = [0]

    @PROP
    @given(st.sampled_from(GOLDEN), scalings, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
    def case(f, a, params):
        count[0] += 1
        g = _scaled(f, a)
        de = find_lowest_de(g, X)
        if de.parameters:
            de = de.instantiate(dict(zip([p.name for p in de.parameters], params)))
        _residual_order(g, de)

    case()
    assert count[0] >= PROPERTY_CASES
    return f"{count[0]} cases"


@criterion("5b RE/oracle consistency")
def test_property_re_oracle():
    count = [0]

    @PROP
    @given(st.sampled_from(INTEGER_GRID), scalings)
    def case(f, a):
        count[0] += 1
        g = _scaled(f, a)
        de = find_lowest_de(g, X)
        if de.parameters:
            de = de.instantiate({})
        re = convert_de_to_re(de)
        s = truncated_series(g, X, 20 + re.order + 2)
        for kk in range(-re.order - 2, 20):
            assert re.holds_at(lambda i: s.coefficient(i) if i >= 0 else 0, kk) == 0, (g, kk)

    case()
    assert count[0] >= PROPERTY_CASES
    return f"{count[0]} cases"


BASE = [sp.exp(x), sp.sin(x), sp.atan(x), sp.log(1 + x), sp.asin(x), sp.erf(x), sp.sqrt(1 + x)]


@functools.lru_cache(maxsize=None)
def _coefficients(f, count):
    r = formal_power_series(f, x)
    return tuple(eval_coefficient(r, e) for e in range(count))


@criterion("5c transformation coherence")
def test_property_transformation_coherence():
    count = [0]

    @PROP
    @given(st.sampled_from(BASE), scalings, st.integers(1, 3))
    def case(f, a, j):
        count[0] += 1
        q = sp.Rational(a.numerator, a.denominator)
        base = _coefficients(f, 13)
        got = _coefficients(f.subs(x, q * x**j), 13)
        for e in range(13):
            want = q ** (e // j) * base[e // j] if e % j == 0 else 0
            assert sp.simplify(got[e] - want) == 0, (f, q, j, e)

    case()
    assert count[0] >= PROPERTY_CASES
    return f"{count[0]} cases"


CONVERGENT = [
    sp.exp(x), sp.sin(x), sp.cos(x) ** 2, sp.atan(x), sp.log(1 + x), sp.sqrt(1 + x),
    sp.asin(x), sp.erf(x), sp.exp(x) * sp.sin(x), x / (1 - x - x**2),
]


@criterion("5d partial_sum numeric check")
def test_property_partial_sum():
    x0, N, digits = sp.Rational(1, 10), 25, 40
    worst = mpmath.mpf(0)
    with mpmath.workdps(digits):
        for f in CONVERGENT:
            r = formal_power_series(f, x)
            err = abs(partial_sum(r, N, x0, digits) - mpmath.mpmathify(sp.N(f.subs(x, x0), digits)))
            assert err <= mpmath.mpf("1e-10"), (f, err)
            worst = max(worst, err)
    return f"{len(CONVERGENT)} functions, max error {mpmath.nstr(worst, 3)}"


def test_property_budget():
    """The property suites together stay within the time budget."""
    runs = {lb.split()[0]: v for lb, v in ACCEPTANCE_RESULTS.items()}
    missing = [lb for lb in PROPERTY_LABELS if lb not in runs]
    if missing:
        pytest.skip(f"property suites not run: {missing}")
    total = sum(runs[lb][1] for lb in PROPERTY_LABELS)
    ok = total < PROPERTY_BUDGET
    ACCEPTANCE_RESULTS["5 total time"] = (ok, total, f"budget {PROPERTY_BUDGET:.0f}s")
    assert ok


# -- 6. streaming ------------------------------------------------------------------------


@criterion("6 Fibonacci stream")
def test_stream_fibonacci():
    re = convert_de_to_re(find_lowest_de(x / (1 - x - x**2), x)).cancel_content()
    s = stream_coefficients(re, [0, 1])
    assert [next(s) for _ in range(8)] == [0, 1, 1, 2, 3, 5, 8, 13]
