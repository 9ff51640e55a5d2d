import pytest
import sympy as sp
from hypothesis import given, strategies as st

from formalps.oracle import truncated_series
from formalps.pipeline import formal_power_series
from formalps.rational import (
    ALPHA,
    PoleTerm,
    expand_pole,
    integrate_series_k_times,
    partial_fractions,
    rational_fps,
)
from formalps.recurrence import K
from formalps.series import eval_at, eval_coefficient, render

X = sp.Symbol("x", positive=True)
x = sp.Symbol("x")


def agree(r, f, count=16):
    s = truncated_series(f.subs(x, X), X, count)
    for e in range(count):
        got = eval_coefficient(r, e)
        assert sp.simplify(got - s.coefficient(e)) == 0, (e, got, s.coefficient(e))


def test_partial_fractions_polynomial_part():
    pf = partial_fractions((1 + x + x**2 + x**3) / ((x - 1) * (x - 2)), x)
    assert pf.polynomial == x + 4
    assert sorted((t.alpha, t.residue, t.order) for t in pf.poles) == [(1, -4, 1), (2, 15, 1)]


def test_partial_fractions_symbolic_residues():
    A, B, C = sp.symbols("A B C")
    pf = partial_fractions(C / ((x - A) * (x - B)), x)
    assert len(pf.poles) == 2 and all(t.residue.has(C) for t in pf.poles)
    assert sp.simplify(pf.as_expr(x) - C / ((x - A) * (x - B))) == 0


def test_partial_fractions_root_sum_quartic():
    pf = partial_fractions(1 / (x**4 + x + 1), x)
    assert not pf.poles and len(pf.root_sums) == 1
    (rs,) = pf.root_sums
    assert rs.poly.as_expr() == ALPHA**4 + ALPHA + 1


def test_expand_pole_simple():
    c = expand_pole(PoleTerm(sp.Integer(1), sp.Integer(1), 2))
    assert [eval_at(c, k) for k in range(5)] == [1, 2, 3, 4, 5]


def test_double_pole_combination():
    f = 1 / ((x - 1) ** 2 * (x - 2))
    r = formal_power_series(f, x)
    want = -sp.Rational(1, 2) * (sp.factorial(K) - 2 * 2**K * sp.factorial(K)
                                 + 2 * sp.factorial(K + 1) * 2**K) / (2**K * sp.factorial(K))
    for k in range(12):
        assert eval_coefficient(r, k) == eval_at(want, k)
    agree(r, f)


def test_polynomial_part_display():
    r = formal_power_series((1 + x + x**2 + x**3) / ((x - 1) * (x - 2)), x)
    assert render(r) == "4+x+Sum(x^k*(4-15/(2*2^k)), k=0..infinity)"
    for k in range(2, 12):
        assert eval_coefficient(r, k) == sp.Rational(1, 2) * (8 * 2**k - 15) / 2**k


def test_fibonacci_explicit_and_root_sum():
    f = x / (1 - x - x**2)
    a = formal_power_series(f, x)
    b = formal_power_series(f, x, explicit=False)
    assert a.sums[0].coefficient.has(sp.sqrt(5))
    assert b.sums[0].coefficient.has(sp.RootSum)
    fib = [0, 1]
    while len(fib) < 16:
        fib.append(fib[-1] + fib[-2])
    for k in range(16):
        assert eval_coefficient(a, k) == fib[k] == eval_coefficient(b, k)


def test_quartic_root_sum_display():
    r = formal_power_series(1 / (x**4 + x + 1), x)
    assert "36*alpha^3/229" in render(r)
    agree(r, 1 / (x**4 + x + 1), 12)


def test_arctan_by_integration():
    d = rational_fps(1 / (1 + X**2), X)
    r = integrate_series_k_times(d, 1, sp.atan(X), X)
    s = truncated_series(sp.atan(X), X, 8)
    for e in range(8):
        assert sp.simplify(eval_coefficient(r, e) - s.coefficient(e)) == 0


def test_integrate_zero_times_is_identity():
    d = rational_fps(1 / (1 - X), X)
    assert integrate_series_k_times(d, 0) == d


def test_dilog_via_second_derivative():
    from formalps.expr import lookup

    dilog = lookup("dilog").cls
    r = formal_power_series(dilog(1 - x), x)
    assert render(r) == "Sum(x^(k+1)/(k+1)^2, k=0..infinity)"


def test_forced_rational_display():
    r = formal_power_series(x * sp.atan(x) - sp.log(1 + x**2) / 2, x, method="rational")
    assert render(r) == "Sum(x^(k+2)*(I^k/2+(-I)^k/2)/((k+1)*(k+2)), k=0..infinity)"


def test_laurent_prefix():
    f = (x + 2) / (x**3 * (x - 3) ** 2)
    r = formal_power_series(f, x)
    s = truncated_series(f.subs(x, X), X, 10)
    for e in range(-3, 10):
        assert sp.simplify(eval_coefficient(r, e) - s.coefficient(e)) == 0


frac = st.fractions(-3, 3, max_denominator=3).map(lambda f: sp.Rational(f.numerator, f.denominator))


@given(frac.filter(lambda a: a != 0), frac, st.integers(1, 3))
def test_expand_pole_matches_brute_force(alpha, c, j):
    coeff = expand_pole(PoleTerm(c, alpha, j))
    series = sp.series(c / (X - alpha) ** j, X, 0, 11).removeO()
    for k in range(11):
        assert eval_at(coeff, k) == series.coeff(X, k)


@given(st.lists(frac.filter(lambda a: a != 0), min_size=1, max_size=3),
       st.lists(st.integers(-3, 3), min_size=1, max_size=4))
def test_recombination(poles, num):
    den = sp.Mul(*[(x - a) for a in poles])
    f = sp.Add(*[c * x**i for i, c in enumerate(num)]) / den
    if sp.cancel(f) == 0:
        return
    r = rational_fps(sp.cancel(f.subs(x, X)), X)
    s = truncated_series(f.subs(x, X), X, 16)
    for e in range(16):
        assert sp.simplify(eval_coefficient(r, e) - s.coefficient(e)) == 0


@given(st.lists(frac.filter(lambda a: a != 0), min_size=1, max_size=2), st.integers(1, 2))
def test_integrate_after_differentiate(poles, kk):
    f = 1 / sp.Mul(*[(X - a) for a in poles])
    d = rational_fps(sp.cancel(sp.diff(f, X, kk)), X)
    r = integrate_series_k_times(d, kk, f, X)
    s = truncated_series(f, X, 10)
    for e in range(10):
        assert sp.simplify(eval_coefficient(r, e) - s.coefficient(e)) == 0
