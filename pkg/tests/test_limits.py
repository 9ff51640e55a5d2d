import mpmath
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from formalps.errors import LimitUndecidedError
from formalps.limits import limit_at_zero, taylor_seed
from formalps.oracle import truncated_series

x = sp.Symbol("x", positive=True)


def test_removable():
    assert limit_at_zero(sp.sin(x) / x, x).value == 1


def test_power_beats_log():
    assert limit_at_zero(x * sp.log(x), x, "right").value == 0


def test_shifted_sin_sqrt_test_expression():
    g = x**2 * sp.sin(sp.sqrt(x)) / x**3
    assert limit_at_zero(x * g, x).value == 0


def test_seeds():
    assert taylor_seed(sp.sin(x), x, 1) == 1
    assert taylor_seed(sp.sin(x), x, 0) == 0
    assert taylor_seed(sp.asech(x), x, 0) == sp.oo


def test_two_sided_disagreement():
    with pytest.raises(LimitUndecidedError):
        limit_at_zero(sp.atan(1 / x), x, "both")
    assert limit_at_zero(sp.atan(1 / x), x, "left").value == -sp.pi / 2


def test_lhopital_quotient():
    assert limit_at_zero((sp.exp(x) - 1 - x) / x**2, x).value == sp.Rational(1, 2)


EXPRS = [
    sp.sin(x) / x, (1 - sp.cos(x)) / x**2, x * sp.log(x), (sp.exp(x) - 1) / sp.sin(x),
    sp.atan(x) / x, sp.log(1 + x) / x, sp.asin(x) / sp.sin(x), x**x, sp.asech(x) + sp.log(x),
    sp.erf(x) / x, (sp.sqrt(1 + x) - 1) / x, sp.cosh(x) - 1, sp.atan(1 / x),
]


@given(st.sampled_from(EXPRS), st.sampled_from(["right", "left"]), st.integers(1, 3))
def test_limit_soundness_numeric(e, direction, scale):
    e = e.subs(x, scale * x)
    try:
        lim = limit_at_zero(e, x, direction)
    except LimitUndecidedError:
        return
    if not lim.is_finite:
        return
    sign = 1 if direction == "right" else -1
    y = sp.Symbol("y")
    f = sp.lambdify(y, e.subs(x, y), "mpmath")
    with mpmath.workdps(40):
        v = mpmath.mpmathify(sp.N(lim.value, 40))
        for p in (6, 8, 10):
            t = sign * mpmath.mpf(10) ** (-p)
            val = f(t)
            assert abs(val - v) <= 10 * abs(t) ** 0.5 * max(1, abs(v)) + mpmath.mpf(10) ** -30


SEEDED = [sp.exp(x), sp.sin(x), sp.cos(x), sp.atan(x), sp.log(1 + x), sp.asin(x), sp.erf(x),
          sp.sinh(x), sp.sqrt(1 + x), sp.acos(x), sp.cosh(x), sp.tan(x)]


@pytest.mark.parametrize("f", SEEDED)
def test_seed_matches_oracle(f):
    s = truncated_series(f, x, 11)
    for kk in range(11):
        assert sp.simplify(taylor_seed(f, x, kk) - s.coefficient(kk)) == 0
