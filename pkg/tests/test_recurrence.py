import sympy as sp
from hypothesis import given, strategies as st

from formalps.oracle import truncated_series
from formalps.recurrence import K, RE, convert_de_to_re, pochhammer_poly, re_holds_for_all_k
from formalps.simple_de import SimpleDE, find_lowest_de

x = sp.Symbol("x", positive=True)
k = K


def test_exp_recurrence():
    assert str(convert_de_to_re(SimpleDE((sp.Integer(-1), sp.Integer(1)), x))) == "(k+1)*a(k+1)-a(k) = 0"


def test_fibonacci_generating_function_keeps_content():
    re = convert_de_to_re(find_lowest_de(x / (1 - x - x**2), x))
    assert str(re) == "(1-k)*a(k)+(k-1)*a(k-1)+(k-1)*a(k-2) = 0"
    reduced = re.cancel_content()
    # recorded in the normalised index; in the original index it is k - 1
    (g,) = reduced.removed_factors
    assert sp.expand(g.subs(k, k + re.shift)) == k - 1


def test_newai_squared(newai):
    re = convert_de_to_re(find_lowest_de(newai(x**2), x))
    assert str(re) == "(k-1)*(k+1)*a(k+1)-4*a(k-5) = 0"


def test_validity():
    assert re_holds_for_all_k(RE({0: sp.Integer(-1), 1: k + 1})).all_nonnegative
    v = re_holds_for_all_k(RE({0: sp.Integer(1), 2: (k + 4) * (k + 3)}))
    assert v.k_max == -3
    ai = RE({0: sp.Integer(-4), 6: sp.expand((k + 4) * (k + 6))}, shift=-5)
    assert re_holds_for_all_k(ai).k_max_original == 1


@given(st.integers(0, 6), st.integers(-4, 4), st.integers(-10, 10))
def test_pochhammer_expansion(j, l, kv):
    want = sp.Integer(1)
    for i in range(j):
        want *= kv + 1 - l + i
    assert pochhammer_poly(k + 1 - l, j).subs(k, kv) == want


GOLDEN = [sp.exp(x), sp.sin(x), sp.atan(x), sp.log(1 + x), sp.sqrt(1 + x), sp.asin(x),
          sp.erf(x), sp.exp(x) * sp.sin(x), x / (1 - x - x**2), sp.asin(x) ** 2, sp.cos(x) ** 2]


def oracle_consistent(f, count=20):
    de = find_lowest_de(f, x)
    if de.parameters:
        de = de.instantiate({})
    re = convert_de_to_re(de)
    s = truncated_series(f, x, count + re.order + 2)

    def a(i):
        return s.coefficient(i) if i >= 0 else sp.Integer(0)

    for kk in range(-re.order - 2, count):
        assert re.holds_at(a, kk) == 0, (f, kk)


def test_oracle_consistency_golden():
    for f in GOLDEN:
        oracle_consistent(f)


@given(st.sampled_from(GOLDEN), st.fractions(-3, 3, max_denominator=3).filter(lambda q: q != 0))
def test_oracle_consistency_scaled(f, a):
    oracle_consistent(f.subs(x, sp.Rational(a.numerator, a.denominator) * x), count=12)


cs = st.lists(st.integers(-3, 3), min_size=1, max_size=3).map(lambda v: sum(c * x**i for i, c in enumerate(v)))


@given(st.lists(cs, min_size=3, max_size=3), st.lists(cs, min_size=3, max_size=3))
def test_linearity(c1, c2):
    d1, d2 = SimpleDE(tuple(c1), x), SimpleDE(tuple(c2), x)
    dsum = SimpleDE(tuple(sp.expand(a + b) for a, b in zip(c1, c2)), x)

    def vec(d):
        try:
            return convert_de_to_re(d).original_form()
        except ValueError:
            return {}

    v1, v2, vs = vec(d1), vec(d2), vec(dsum)
    for e in set(v1) | set(v2) | set(vs):
        assert sp.expand(v1.get(e, 0) + v2.get(e, 0) - vs.get(e, 0)) == 0
