"""Search for a simple (homogeneous, polynomial-coefficient) DE.

For a degree ``k`` the ansatz ``f^(k) + sum_{j<k} A_j f^(j) = 0`` is expanded
into rational-coefficient-times-kernel form.  Every class of rationally
dependent kernels gives one linear equation for the unknowns ``A_j`` over
``Q(params)(x)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import sympy as sp

from .arith import solve_linear
from .errors import InconsistentSystemError, NoDEFoundError
from .printing import signed_factor_text
from .expr import KernelBasis, differentiate, family_floors, family_reduce, to_term_form

log = logging.getLogger("formalps.simple_de")


def _print_derivative(j, name="F", var="x"):
    return f"{name}{chr(39) * j}({var})" if j <= 3 else f"{name}^({j})({var})"


@dataclass(frozen=True)
class SimpleDE:
    """``sum_j coefficients[j] * f^(j) = 0`` with polynomial coefficients."""

    coefficients: tuple
    var: sp.Symbol

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def parameters(self):
        return ()

    def apply(self, f):
        """Left-hand side evaluated on ``f``."""
        return sp.Add(*[c * sp.diff(f, self.var, j) for j, c in enumerate(self.coefficients)])

    def is_constant_coefficient(self):
        return all(self.var not in sp.sympify(c).free_symbols for c in self.coefficients)

    def max_coefficient_degree(self):
        return max(sp.Poly(c, self.var).degree() for c in self.coefficients if c != 0)

    def __str__(self):
        parts = []
        for j in reversed(range(len(self.coefficients))):
            c = sp.factor(self.coefficients[j])
            if c == 0:
                continue
            parts.append((c, _print_derivative(j, var=str(self.var))))
        out = ""
        for c, d in parts:
            if c == 1:
                chunk = f"+{d}"
            elif c == -1:
                chunk = f"-{d}"
            else:
                sign, txt = signed_factor_text(c)
                chunk = (sign or "+") + txt + "*" + d
            out += chunk
        return (out.lstrip("+") or "0") + " = 0"


@dataclass(frozen=True)
class ParametricDE(SimpleDE):
    """A family of DEs, affine in the free parameter symbols."""

    params: tuple = ()

    @property
    def parameters(self):
        return self.params

    def instantiate(self, values) -> SimpleDE:
        sub = {p: sp.sympify(values.get(p.name, values.get(p, 0))) for p in self.params}
        coeffs = [sp.expand(c.xreplace(sub)) for c in self.coefficients]
        return SimpleDE(tuple(_normalise(coeffs, self.var)), self.var)


def _normalise(coeffs, var, params=()):
    """Clear denominators, remove the common factor and fix the sign."""
    coeffs = [sp.cancel(sp.together(c)) for c in coeffs]
    den = sp.Integer(1)
    for c in coeffs:
        _, d = sp.fraction(c)
        den = sp.lcm(den, d)
    coeffs = [sp.expand(sp.cancel(c * den)) for c in coeffs]
    nz = [c for c in coeffs if c != 0]
    if not nz:
        return coeffs
    if not params:
        g = nz[0]
        for c in nz[1:]:
            g = sp.gcd(g, c)
        if g != 0 and g != 1:
            coeffs = [sp.expand(sp.cancel(c / g)) for c in coeffs]
    else:
        g = _affine_gcd(nz, var, params)
        if g != 1:
            coeffs = [sp.expand(sp.cancel(c / g)) for c in coeffs]
    lead = next(c for c in reversed(coeffs) if c != 0)
    if _negative_lc(lead, var):
        coeffs = [-c for c in coeffs]
    return coeffs


def _negative_lc(e, var):
    gens = [var] + sorted(e.free_symbols - {var}, key=lambda s: s.name)
    lc = sp.sympify(sp.Poly(e, *gens).LC())
    return bool(lc < 0) if lc.is_number else lc.could_extract_minus_sign()


def _affine_gcd(exprs, var, params):
    """Common factor of expressions affine in ``params`` that does not involve them."""
    parts = []
    for c in exprs:
        c = sp.expand(c)
        parts.append(c.subs({p: 0 for p in params}))
        for p in params:
            parts.append(sp.expand(c.coeff(p)))
    parts = [p for p in parts if p != 0]
    if not parts:
        return sp.Integer(1)
    g = parts[0]
    for p in parts[1:]:
        g = sp.gcd(g, p)
    return g if g != 0 else sp.Integer(1)


def find_simple_de(f, var, k):
    """Look for a simple DE of degree ``k`` satisfied by ``f``.

    Returns a :class:`SimpleDE`, or a :class:`ParametricDE` if the linear
    system is underdetermined; raises ``NoDEFoundError`` otherwise.

    >>> import sympy as sp
    >>> x = sp.Symbol('x', positive=True)
    >>> print(find_simple_de(sp.sin(x), x, 2))
    F''(x)+F(x) = 0
    """
    if k < 1:
        raise ValueError("degree must be at least 1")
    ders = [sp.sympify(f)]
    for _ in range(k):
        ders.append(differentiate(ders[-1], var))
    floors = family_floors(ders)
    ders = [family_reduce(d, floors) for d in ders]
    basis = KernelBasis(var)
    vectors = [to_term_form(d, var, basis).coefficient_vector(basis) for d in ders]
    nk = len(basis.kernels)
    rows = [[vectors[j].get(i, 0) for j in range(k)] for i in range(nk)]
    rhs = [-vectors[k].get(i, 0) for i in range(nk)]
    names = [f"A{j}" for j in range(k)]
    try:
        space = solve_linear(rows, rhs, names)
    except InconsistentSystemError:
        raise NoDEFoundError(f"no simple DE of degree {k}", obj=f) from None
    if space.is_unique:
        de = SimpleDE(tuple(_normalise(list(space.particular) + [sp.Integer(1)], var)), var)
        log.info("found DE of degree %d: %s", k, de)
        return de
    params = tuple(sp.Symbol(n) for n in space.free_parameter_names)
    sol = space.symbolic(params)
    coeffs = _normalise(list(sol) + [sp.Integer(1)], var, params)
    de = ParametricDE(tuple(coeffs), var, params)
    log.info("found parametric DE of degree %d in %s", k, [p.name for p in params])
    return de


def find_lowest_de(f, var, kmax=5):
    """First DE found for ``k = 1..kmax``."""
    for k in range(1, kmax + 1):
        try:
            return find_simple_de(f, var, k)
        except NoDEFoundError:
            continue
    raise NoDEFoundError(f"no simple DE of degree <= {kmax}", obj=f)
