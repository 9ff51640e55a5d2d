import sympy as sp
from hypothesis import given, strategies as st

import pytest

from formalps.errors import NoDEFoundError
from formalps.expr import declare_function, lookup, register_function, unregister
from formalps.oracle import truncated_series
from formalps.simple_de import ParametricDE, find_lowest_de, find_simple_de

x = sp.Symbol("x", positive=True)
n = sp.Symbol("n")


def coeffs(de):
    return [sp.expand(c) for c in de.coefficients]


def test_sin_degree_two():
    assert coeffs(find_simple_de(sp.sin(x), x, 2)) == [1, 0, 1]


def test_exp_lowest():
    de = find_lowest_de(sp.exp(x), x)
    assert de.degree == 1 and coeffs(de) == [-1, 1]


def test_newai(newai):
    de = find_lowest_de(newai(x), x)
    assert str(de) == "F''(x)-x*F(x) = 0"


def test_fibonacci_polynomials():
    de = find_simple_de(lookup("Fibonacci").cls(n, x), x, 2)
    assert str(de) == "(x^2+4)*F''(x)+3*x*F'(x)-(n-1)*(n+1)*F(x) = 0"


def test_sin_sqrt_over_x():
    de = find_lowest_de(sp.sin(sp.sqrt(x)) / x, x)
    assert coeffs(de) == [x + 2, 10 * x, 4 * x**2]


def test_parametric_family_has_two_parameters():
    de = find_simple_de(x * sp.exp(x) * sp.sin(2 * x), x, 4)
    assert isinstance(de, ParametricDE)
    A2, A3 = de.parameters
    assert [p.name for p in de.parameters] == ["A2", "A3"]
    lead = sp.expand(de.coefficients[4])
    assert sp.expand(de.coefficients[1] / lead * x**2 - (A3 - 2 * A2 + 12) * x**2
                     - (-6 * A3 - 2 * A2 + 4) * x) == 0
    want0 = (10 * A3 + 5 * A2 - 5) * x**2 + (14 * A3 + 2 * A2 + 28) * x + 6 * A3 + 2 * A2 - 4
    assert sp.expand(de.coefficients[0] - want0 * lead / x**2) == 0


def test_no_de_for_non_closing_kernels():
    # each derivative produces a fresh kernel: g_j' = g_{j+1}
    names = [f"chain{i}" for i in range(7)]
    for nm in names:
        declare_function(nm, 1)
    try:
        for a, b in zip(names, names[1:]):
            register_function(a, [x], lookup(b).cls(x))
        with pytest.raises(NoDEFoundError):
            find_lowest_de(lookup(names[0]).cls(x), x, 4)
    finally:
        for nm in names:
            unregister(nm)


GOLDEN = [
    sp.exp(x), sp.sin(x), sp.cos(x) ** 2, sp.atan(x), sp.log(1 + x), sp.sqrt(1 + x),
    sp.asin(x), sp.erf(x), sp.exp(x) * sp.sin(x), sp.sin(sp.sqrt(x)) / x, sp.asin(x) ** 2,
    x / (1 - x - x**2), sp.cosh(x) * sp.cos(x), sp.exp(-x**2),
]


def residual_vanishes(f, de, N=16):
    s = truncated_series(f, x, N)
    res = sp.Integer(0)
    series = sum(c * x**e for e, c in s.coeffs.items())
    for j, c in enumerate(de.coefficients):
        res += c * sp.diff(series, x, j)
    lo = min(s.coeffs) if s.coeffs else 0
    bound = N - de.degree - de.max_coefficient_degree() + lo
    res = sp.expand(res)
    for term in sp.Add.make_args(res):
        if term == 0:
            continue
        _, e = term.as_coeff_exponent(x)
        assert e >= bound, (f, de, term)


@given(
    st.sampled_from(GOLDEN),
    st.fractions(-3, 3, max_denominator=4).filter(lambda q: q != 0),
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
)
def test_de_soundness_random_scaling(f, a, params):
    a = sp.Rational(a.numerator, a.denominator)
    g = f.subs(x, a * x) if not f.has(sp.sqrt(x)) else f.subs(x, a**2 * x)
    de = find_lowest_de(g, x)
    if de.parameters:
        de = de.instantiate(dict(zip([p.name for p in de.parameters], params)))
    residual_vanishes(g, de)


@pytest.mark.parametrize("f", GOLDEN[:8])
def test_family_existence_next_degree(f):
    de = find_lowest_de(f, x)
    find_simple_de(f, x, de.degree + 1)
