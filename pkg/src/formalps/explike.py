"""Constant-coefficient DEs, solved through the characteristic polynomial.

Writing ``f = sum b_k x^k/k!`` turns ``sum c_j f^(j) = 0`` into the
recurrence ``sum c_j b_{k+j} = 0``, whose solutions are combinations of
``k^i rho^k`` over the characteristic roots ``rho``.  Conjugate complex
pairs are folded into ``r^k (alpha cos(k theta) + beta sin(k theta))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import sympy as sp

from .arith import factor_over_Q, solve_linear
from .errors import InconsistentSystemError, TuningFailedError, UnfactorableCharacteristicError
from .limits import taylor_seed
from .recurrence import K
from .series import FPSResult, PowerSum
from .simple_de import ParametricDE, SimpleDE

log = logging.getLogger("formalps.explike")

LAM = sp.Symbol("lambda")


@dataclass(frozen=True)
class CharRoot:
    """A characteristic root (or conjugate pair) with multiplicity.

    ``kind`` is ``rational``, ``surd-pair`` (``p +- sqrt(d)``) or
    ``complex-pair`` (``p +- i q`` with ``q > 0``).
    """

    kind: str
    p: sp.Expr
    q: sp.Expr = sp.Integer(0)
    multiplicity: int = 1

    def roots(self):
        if self.kind == "rational":
            return [self.p]
        if self.kind == "surd-pair":
            return [self.p + sp.sqrt(self.q), self.p - sp.sqrt(self.q)]
        return [self.p + sp.I * self.q, self.p - sp.I * self.q]

    def modulus(self):
        return sp.sqrt(self.p**2 + self.q**2)

    def angle(self):
        p, q = self.p, self.q
        if p == 0:
            return sp.pi / 2
        th = sp.atan(q / p)
        return th + sp.pi if p.is_negative else th


@dataclass(frozen=True)
class ExpLikeSolution:
    """``b_k = sum coefficient_i * basis_i(k)``; ``deltas`` are ``k = i`` spikes from a zero root."""

    terms: tuple  # (coefficient, basis Expr in k)
    deltas: tuple = ()  # (index, value)
    roots: tuple = ()

    def b(self):
        return sp.Add(*[c * e for c, e in self.terms])

    def b_at(self, k):
        from .series import eval_at

        out = eval_at(self.b(), k)
        for i, v in self.deltas:
            if i == k:
                out += v
        return sp.simplify(out)


def tune_constant_coefficients(de, return_values=False):
    """Constant parameter values turning the DE into a constant-coefficient one.

    The leading coefficient ``L(x)`` is parameter free.  Every other
    coefficient must become ``lambda_j L(x)`` for a constant ``lambda_j``;
    as the coefficients are affine in the parameters this is a linear
    system in the parameters and the ``lambda_j`` together.  Dividing by
    ``L`` afterwards gives constant coefficients.  With ``return_values``
    the parameter assignment is returned as well.
    """
    if de.is_constant_coefficient():
        out = de if isinstance(de, SimpleDE) and not de.parameters else de.instantiate({})
        return ({}, out) if return_values else out
    x = de.var
    params = list(de.parameters)
    lead = sp.Poly(sp.expand(de.coefficients[-1]), x)
    if params and lead.as_expr().has(*params):
        raise TuningFailedError("leading coefficient depends on the parameters", obj=de)
    lams = [sp.Dummy(f"lam{j}") for j in range(len(de.coefficients) - 1)]
    unknowns = params + lams
    rows, rhs = [], []
    for j, c in enumerate(de.coefficients[:-1]):
        poly = sp.Poly(sp.expand(c - lams[j] * lead.as_expr()), x)
        for a in poly.all_coeffs():
            a = sp.expand(a)
            row = [sp.expand(a.coeff(t)) for t in unknowns]
            if any(r.has(x) for r in row):
                raise TuningFailedError("parameters cannot be constants", obj=de)
            rows.append(row)
            rhs.append(-a.subs({t: 0 for t in unknowns}))
    try:
        space = solve_linear(rows, rhs, [str(t) for t in unknowns])
    except InconsistentSystemError:
        raise TuningFailedError("no constant-coefficient member of the family", obj=de) from None
    values = dict(zip([t.name for t in params], space.particular[: len(params)]))
    out = de.instantiate(values) if isinstance(de, ParametricDE) else de
    if not out.is_constant_coefficient():
        raise TuningFailedError("tuned DE still has variable coefficients", obj=de)
    log.info("constant coefficients with %s: %s", values, out)
    return (values, out) if return_values else out


def characteristic_roots(coeffs):
    """Roots of ``sum coeffs[j] lambda^j`` up to quadratic factors."""
    chi = sp.Poly(sum(c * LAM**j for j, c in enumerate(coeffs)), LAM)
    _, low, rest = factor_over_Q(chi, LAM)
    if rest.degree() > 0:
        raise UnfactorableCharacteristicError(
            f"characteristic factor of degree {rest.degree()}", obj=rest.as_expr()
        )
    out = []
    for fac, mult in low:
        cs = fac.all_coeffs()
        if fac.degree() == 1:
            a, b = cs
            out.append(CharRoot("rational", sp.simplify(-b / a), multiplicity=mult))
        else:
            a, b, c = cs
            p = sp.simplify(-b / (2 * a))
            disc = sp.simplify((b**2 - 4 * a * c) / (4 * a**2))
            if disc.is_negative:
                out.append(CharRoot("complex-pair", p, sp.sqrt(-disc), mult))
            else:
                out.append(CharRoot("surd-pair", p, disc, mult))
    return out


def _basis(roots):
    """Basis functions of ``k`` and zero-root spike indices."""
    funcs, spikes = [], []
    for rt in roots:
        for i in range(rt.multiplicity):
            kp = K**i
            if rt.kind == "rational":
                if rt.p == 0:
                    spikes.append(i)
                else:
                    funcs.append(kp * rt.p**K)
            elif rt.kind == "surd-pair":
                for r in rt.roots():
                    funcs.append(kp * r**K)
            else:
                r, th = rt.modulus(), rt.angle()
                funcs.append(kp * r**K * sp.cos(K * th))
                funcs.append(kp * r**K * sp.sin(K * th))
    return funcs, spikes


def _basis_value(func, k, roots):
    """Exact value of a basis function at integer ``k``."""
    v = func.xreplace({K: sp.Integer(k)})
    return sp.simplify(sp.expand_trig(v))


def solve_explike(de: SimpleDE, f, var, direction="right") -> FPSResult:
    """Series ``sum b_k x^k/k!`` of ``f`` from a constant-coefficient DE."""
    coeffs = [sp.sympify(c) for c in de.coefficients]
    lead = coeffs[-1]
    coeffs = [sp.simplify(c / lead) for c in coeffs]
    roots = characteristic_roots(coeffs)
    log.info("characteristic roots %s", roots)
    funcs, spikes = _basis(roots)
    order = de.degree
    b0 = []
    for i in range(order):
        b0.append(sp.simplify(taylor_seed(f, var, i, direction) * sp.factorial(i)))
    # unknowns: one per basis function, one per spike
    rows = []
    for k in range(order):
        row = [_basis_value(fn, k, roots) for fn in funcs]
        row += [sp.Integer(1 if k == i else 0) for i in spikes]
        rows.append(row)
    names = [f"c{i}" for i in range(len(funcs) + len(spikes))]
    space = solve_linear(rows, b0, names)
    consts = [sp.simplify(c) for c in space.particular]
    terms = tuple((c, fn) for c, fn in zip(consts, funcs) if c != 0)
    deltas = tuple((i, c) for i, c in zip(spikes, consts[len(funcs):]) if c != 0)
    sol = ExpLikeSolution(terms, deltas, tuple(roots))
    b = sp.collect(sp.expand(sol.b()), [K], evaluate=True) if terms else sp.Integer(0)
    sums = (PowerSum(sp.factor_terms(b) / sp.factorial(K), 1, 1, 0, sp.Integer(0)),) if terms else ()
    explicit = tuple((sp.Integer(i), v / sp.factorial(i)) for i, v in deltas)
    res = FPSResult(sums, explicit, var=var, direction=direction).normalised()
    return res.map(meta={"explike": sol})
