"""Exact arithmetic layer.

Rationals are sympy ``Rational``; multivariate polynomials are sympy ``Poly``
objects over an ordered generator list (the main variable first, then the
remaining symbols sorted by name).  Everything non-``x`` is treated as an
opaque transcendental, so zero testing reduces to normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import sympy as sp
from sympy.polys.matrices import DomainMatrix
from sympy.polys.constructor import construct_domain

from .errors import InconsistentSystemError

BigRational = sp.Rational


def ordered_gens(exprs, main=None):
    """Generator tuple with ``main`` first and the other free symbols sorted."""
    syms = set()
    for e in exprs:
        syms |= sp.sympify(e).free_symbols
    if main is not None:
        syms.discard(main)
    rest = sorted(syms, key=lambda s: s.name)
    return ((main,) if main is not None else ()) + tuple(rest)


def as_poly(expr, *gens):
    if isinstance(expr, sp.Poly):
        return expr
    return sp.Poly(sp.sympify(expr), *gens)


def _canonical(p: sp.Poly) -> sp.Poly:
    """Primitive part with a positive leading coefficient."""
    if p.is_zero:
        return p
    if p.get_domain().is_Field:
        p = p.clear_denoms(convert=True)[1]
    _, p = p.primitive()
    if p.as_expr().could_extract_minus_sign() or sp.sympify(p.LC()).could_extract_minus_sign():
        p = -p
    return p


def poly_gcd(p, q, *gens) -> sp.Poly:
    """Primitive, sign-canonical gcd; ``gcd(0, 0) == 0``."""
    if not isinstance(p, sp.Poly) or not isinstance(q, sp.Poly):
        gens = gens or ordered_gens([p, q])
        p, q = as_poly(p, *gens), as_poly(q, *gens)
    p, q = p.unify(q)
    if p.is_zero and q.is_zero:
        return p
    return _canonical(p.gcd(q))


def rational_roots(p, var=None):
    """Rational roots of a univariate polynomial, with multiplicities, ascending.

    Symbolic coefficients are allowed; only roots that are rational numbers
    are reported.
    """
    if not isinstance(p, sp.Poly):
        if var is None:
            var = ordered_gens([p])[0]
        p = sp.Poly(p, var)
    if p.is_zero:
        raise ValueError("rational_roots of the zero polynomial")
    if len(p.gens) > 1:
        var = p.gens[0] if var is None else var
        p = sp.Poly(p.as_expr(), var)
    found = {}
    _, factors = p.factor_list()
    for fac, mult in factors:
        if fac.degree() != 1:
            continue
        a, b = fac.all_coeffs()
        root = sp.sympify(-b / a)
        if root.is_Rational:
            found[root] = found.get(root, 0) + mult
    return sorted(found.items(), key=lambda t: t[0])


def integer_roots(p, var=None):
    return [r for r, _ in rational_roots(p, var) if r.is_Integer]


def factor_over_Q(p, var=None):
    """Split ``p`` into a constant, its linear and quadratic factors, and the rest.

    Returns ``(constant, [(factor, multiplicity), ...], remainder)``; every
    factor is an irreducible ``Poly`` of degree 1 or 2 and ``remainder``
    collects the irreducible factors of higher degree.
    """
    if not isinstance(p, sp.Poly):
        if var is None:
            var = ordered_gens([p])[0]
        p = sp.Poly(p, var)
    const, factors = p.factor_list()
    low, rest = [], sp.Poly(1, *p.gens, domain=p.get_domain())
    for fac, mult in factors:
        if fac.degree() <= 2:
            low.append((fac, mult))
        else:
            rest = rest * fac**mult
    low.sort(key=lambda t: (t[0].degree(), [str(c) for c in t[0].all_coeffs()]))
    return const, low, rest


@dataclass(frozen=True)
class RatFun:
    """Normalised quotient of polynomials over a shared generator list."""

    num: sp.Poly
    den: sp.Poly

    @classmethod
    def from_expr(cls, expr, main, gens=None):
        expr = sp.cancel(sp.together(sp.sympify(expr)))
        n, d = sp.fraction(expr)
        if gens is None:
            gens = ordered_gens([n, d], main)
        if d == 0:
            raise ZeroDivisionError("RatFun with zero denominator")
        lc = sp.Poly(d, gens[0]).LC() if gens else d
        if sp.sympify(lc).could_extract_minus_sign():
            n, d = -n, -d
        return cls(sp.Poly(n, *gens), sp.Poly(d, *gens))

    def as_expr(self):
        return self.num.as_expr() / self.den.as_expr()

    @property
    def is_zero(self):
        return self.num.is_zero

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return sp.cancel(self.as_expr() - other.as_expr()) == 0
        return sp.cancel(self.as_expr() - sp.sympify(other)) == 0

    def __hash__(self):
        return hash((self.num.as_expr(), self.den.as_expr()))

    def __repr__(self):
        return f"RatFun({self.as_expr()})"


@dataclass(frozen=True)
class AffineSolutionSpace:
    """``particular + sum(t_i * directions[i])`` solves the originating system."""

    particular: tuple
    free_directions: tuple = ()
    free_parameter_names: tuple = ()

    @property
    def is_unique(self):
        return not self.free_directions

    def instantiate(self, values):
        """Solution vector for ``values`` (mapping parameter name -> value)."""
        out = []
        for i, p in enumerate(self.particular):
            v = p
            for name, d in zip(self.free_parameter_names, self.free_directions):
                v = v + sp.sympify(values.get(name, 0)) * d[i]
            out.append(sp.cancel(v))
        return out

    def symbolic(self, symbols=None):
        if symbols is None:
            symbols = [sp.Symbol(n) for n in self.free_parameter_names]
        return self.instantiate(dict(zip(self.free_parameter_names, symbols)))


def _field_elements(entries):
    exprs = [sp.sympify(e.as_expr() if isinstance(e, RatFun) else e) for e in entries]
    return construct_domain(exprs, field=True)


def solve_linear(matrix, rhs=None, unknowns=None):
    """Gaussian elimination over the fraction field generated by the entries.

    ``matrix`` is a list of rows, ``rhs`` the right-hand side (zeros when
    omitted).  Free parameters take the names of the non-pivot ``unknowns``
    (defaulting to ``t0, t1, ...``).  Raises ``InconsistentSystemError``.
    """
    rows = [list(r) for r in matrix]
    ncols = len(unknowns) if unknowns is not None else (len(rows[0]) if rows else 0)
    if unknowns is None:
        unknowns = [f"t{i}" for i in range(ncols)]
    unknowns = [str(u) for u in unknowns]
    if rhs is None:
        rhs = [0] * len(rows)
    if not rows:
        zeros = tuple(sp.Integer(0) for _ in range(ncols))
        dirs = tuple(
            tuple(sp.Integer(1 if i == j else 0) for i in range(ncols)) for j in range(ncols)
        )
        return AffineSolutionSpace(zeros, dirs, tuple(unknowns))
    aug = [r + [b] for r, b in zip(rows, rhs)]
    flat = [e for r in aug for e in r]
    dom, elems = _field_elements(flat)
    width = ncols + 1
    dm = DomainMatrix(
        [elems[i * width:(i + 1) * width] for i in range(len(aug))], (len(aug), width), dom
    )
    rref, pivots = dm.rref()
    if ncols in pivots:
        raise InconsistentSystemError("linear system is inconsistent")
    R = rref.to_Matrix()
    free = [j for j in range(ncols) if j not in pivots]
    part = [sp.Integer(0)] * ncols
    for row, pc in enumerate(pivots):
        part[pc] = R[row, ncols]
    dirs = []
    for fc in free:
        d = [sp.Integer(0)] * ncols
        d[fc] = sp.Integer(1)
        for row, pc in enumerate(pivots):
            d[pc] = -R[row, fc]
        dirs.append(tuple(sp.cancel(v) for v in d))
    return AffineSolutionSpace(
        tuple(sp.cancel(v) for v in part),
        tuple(dirs),
        tuple(unknowns[j] for j in free),
    )


def lcm_list(polys):
    return reduce(lambda a, b: a.lcm(b), polys)


def gcd_list(polys):
    return reduce(lambda a, b: a.gcd(b), polys)
