"""From a simple DE to the recurrence for its series coefficients.

With ``f = sum a_k x^k`` the monomial ``x^l f^(j)`` contributes
``(k+1-l)_j a_{k+j-l}`` to the coefficient of ``x^k``.  The resulting
recurrence is stored with its smallest offset moved to zero; the original
offsets stay available through ``shift``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .arith import integer_roots
from .simple_de import SimpleDE

K = sp.Symbol("k", integer=True)


def pochhammer_poly(a, j):
    """``(a)_j`` expanded as a polynomial."""
    out = sp.Integer(1)
    for i in range(j):
        out *= a + i
    return sp.expand(out)


@dataclass(frozen=True)
class RE:
    """``sum_e coeffs[e](k) a_{k+e} = 0`` for normalised offsets ``e >= 0``.

    ``shift`` is the smallest original offset: the normalised recurrence at
    index ``k`` is the original one at ``k - shift``.
    """

    coeffs: dict
    shift: int = 0
    params: tuple = ()
    removed_factors: tuple = field(default=())

    @property
    def offsets(self):
        return sorted(e for e, c in self.coeffs.items() if c != 0)

    @property
    def order(self):
        return max(self.offsets)

    def leading(self):
        return self.coeffs[self.order]

    def holds_at(self, seq, k):
        """Residual of the recurrence at normalised index ``k`` for ``seq(i)``."""
        return sp.simplify(sp.Add(*[c.subs(K, k) * seq(k + e) for e, c in self.coeffs.items()]))

    def original_form(self):
        """``{original offset: coefficient in the original index}``."""
        return {
            e + self.shift: sp.expand(c.subs(K, K + self.shift)) for e, c in self.coeffs.items()
        }

    def is_parametric(self):
        return bool(self.params) and any(
            c.has(*self.params) for c in self.coeffs.values()
        )

    def instantiate(self, values):
        sub = {p: sp.sympify(values.get(p.name, values.get(p, 0))) for p in self.params}
        return RE(
            {e: sp.expand(c.xreplace(sub)) for e, c in self.coeffs.items()},
            self.shift,
            (),
            self.removed_factors,
        )

    def cancel_content(self):
        """Divide by the common polynomial factor in ``k`` (parameter-free REs only).

        Returns the new recurrence; the removed factor is recorded because
        its integer roots are indices where the original relation carried
        information the reduced one does not.
        """
        if self.is_parametric():
            return self
        nz = [c for c in self.coeffs.values() if c != 0]
        g = nz[0]
        for c in nz[1:]:
            g = sp.gcd(g, c)
        g = sp.factor(g)
        if g in (0, 1):
            return self
        removed = self.removed_factors + ((g,) if g.has(K) else ())
        return RE(
            {e: sp.expand(sp.cancel(c / g)) for e, c in self.coeffs.items() if c != 0},
            self.shift,
            self.params,
            removed,
        )

    def __str__(self):
        return format_re(self, original=True)


def format_re(re: RE, original=True):
    from .printing import signed_factor_text

    form = re.original_form() if original else dict(re.coeffs)
    parts = []
    for e in sorted(form, reverse=True):
        c = sp.factor(form[e])
        if c == 0:
            continue
        idx = "k" if e == 0 else (f"k+{e}" if e > 0 else f"k-{-e}")
        if c == 1:
            term = f"a({idx})"
        elif c == -1:
            term = f"-a({idx})"
        else:
            sign, txt = signed_factor_text(c)
            term = f"{sign}{txt}*a({idx})"
        parts.append(term)
    out = "+".join(parts).replace("+-", "-")
    return (out or "0") + " = 0"


def convert_de_to_re(de: SimpleDE) -> RE:
    """Coefficient recurrence of ``de``.

    >>> import sympy as sp
    >>> from formalps.simple_de import SimpleDE
    >>> x = sp.Symbol('x')
    >>> print(convert_de_to_re(SimpleDE((sp.Integer(-1), sp.Integer(1)), x)))
    (k+1)*a(k+1)-a(k) = 0
    """
    x = de.var
    acc: dict[int, sp.Expr] = {}
    for j, c in enumerate(de.coefficients):
        poly = sp.Poly(sp.expand(c), x)
        for (l,), a in poly.terms():
            off = j - l
            acc[off] = acc.get(off, 0) + a * pochhammer_poly(K + 1 - l, j)
    acc = {e: sp.expand(v) for e, v in acc.items() if sp.expand(v) != 0}
    if not acc:
        raise ValueError("the zero DE has no recurrence")
    d0 = min(acc)
    coeffs = {e - d0: sp.expand(v.subs(K, K - d0)) for e, v in acc.items()}
    return RE(coeffs, d0, tuple(de.parameters))


@dataclass(frozen=True)
class Validity:
    """Forward-iteration bound of a recurrence.

    ``k_max`` is the largest integer root of the leading coefficient in the
    normalised index (``None`` if there is none); forward iteration from
    seeds determines ``a_{k+order}`` for every ``k > k_max``.
    """

    all_nonnegative: bool
    k_max: int | None
    k_max_original: int | None


def re_holds_for_all_k(re: RE) -> Validity:
    roots = integer_roots(sp.Poly(re.leading(), K), K)
    if not roots:
        return Validity(True, None, None)
    km = int(max(roots))
    return Validity(km < 0, km, km - re.shift)
