"""Symbolic expressions, the function catalog and term-form expansion.

Expressions are sympy trees; sympy already keeps sums and products
flattened and canonically ordered.  This module adds

* a catalog of functions with their derivative rules and values at zero,
  extensible at runtime (including function *families* ``F(n, x)`` whose
  derivative mentions ``F(n-1, x)`` and which carry a recurrence),
* the split of an expanded expression into rational coefficient times
  transcendental kernel, with rationally dependent kernels merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import sympy as sp

from .arith import RatFun
from .errors import MissingRecurrenceError, NotTermRepresentableError, UnknownFunctionError


@dataclass
class FunctionDef:
    """Catalog entry.

    ``derivative`` maps the argument tuple to the partial derivative with
    respect to the last argument; builtins leave it ``None`` and rely on
    sympy's rule.  ``recurrence`` maps the argument tuple to an expression
    for ``F(n, ...)`` in lower family members.
    """

    name: str
    arity: int
    cls: type
    derivative: Callable | None = None
    value_at_zero: Callable | None = None
    family: bool = False
    recurrence: Callable | None = None
    recurrence_order: int = 0
    builtin: bool = False


_CATALOG: dict[str, FunctionDef] = {}
_BY_CLASS: dict[type, FunctionDef] = {}


class CatalogFunction(sp.Function):
    """Base for functions whose rules live in the catalog."""

    _fdef: FunctionDef = None

    @classmethod
    def eval(cls, *args):
        fdef = cls._fdef
        if fdef is None or fdef.value_at_zero is None:
            return None
        if args[-1].is_zero:
            return fdef.value_at_zero(*args)
        return None

    def fdiff(self, argindex=1):
        fdef = self._fdef
        if argindex != len(self.args) or fdef.derivative is None:
            raise sp.ArgumentIndexError(self, argindex)
        return fdef.derivative(*self.args)


def _register(fdef: FunctionDef) -> FunctionDef:
    _CATALOG[fdef.name] = fdef
    _BY_CLASS[fdef.cls] = fdef
    return fdef


def lookup(name: str) -> FunctionDef:
    try:
        return _CATALOG[name]
    except KeyError:
        raise UnknownFunctionError(f"unknown function {name!r}", obj=name) from None


def catalog_names():
    return sorted(_CATALOG)


def is_known(name: str) -> bool:
    return name in _CATALOG


def definition_of(func_cls) -> FunctionDef | None:
    return _BY_CLASS.get(func_cls)


def _template(template, params):
    """Turn a template expression in ``params`` into a callable on args."""
    params = tuple(params)

    def apply(*args):
        return template.xreplace(dict(zip(params, args)))

    return apply


def declare_function(name: str, arity: int, *, family: bool = False) -> type:
    """Create (or fetch) the sympy class for a catalog function.

    Rules are attached later by :func:`register_function`, which allows
    mutually referencing definitions such as ``newAi``/``newAiPrime``.
    """
    if name in _CATALOG and not _CATALOG[name].builtin:
        return _CATALOG[name].cls
    cls = type(name, (CatalogFunction,), {"nargs": arity})
    fdef = FunctionDef(name=name, arity=arity, cls=cls, family=family)
    cls._fdef = fdef
    _register(fdef)
    return cls


def register_function(
    name: str,
    params,
    derivative=None,
    *,
    value_at_zero=None,
    recurrence=None,
) -> type:
    """Register a function or family from templates.

    ``params`` are the symbols the templates are written in; the last one is
    the differentiation argument.  A function with a ``recurrence`` (or more
    than one argument) is a family whose first argument is the index.
    """
    params = tuple(sp.Symbol(p) if isinstance(p, str) else p for p in params)
    family = recurrence is not None or len(params) > 1
    cls = declare_function(name, len(params), family=family)
    fdef = _CATALOG[name]
    fdef.family = family
    if derivative is not None:
        fdef.derivative = _template(sp.sympify(derivative), params)
    if value_at_zero is not None:
        fdef.value_at_zero = _template(sp.sympify(value_at_zero), params)
    if recurrence is not None:
        rec = sp.sympify(recurrence)
        fdef.recurrence = _template(rec, params)
        n = params[0]
        shifts = set()
        for app in rec.atoms(cls):
            c, _ = (app.args[0] - n).as_coeff_Add()
            shifts.add(int(-c))
        fdef.recurrence_order = max(shifts) if shifts else 0
    if fdef.family and fdef.derivative is not None and fdef.recurrence is None:
        n = params[0]
        probe = fdef.derivative(*params)
        if any(app.args[0] != n for app in probe.atoms(cls)):
            raise MissingRecurrenceError(
                f"family {name} has a shifted derivative rule but no recurrence", obj=name
            )
    return cls


def unregister(name: str):
    fdef = _CATALOG.pop(name, None)
    if fdef is not None:
        _BY_CLASS.pop(fdef.cls, None)


class dilog(CatalogFunction):
    """Dilogarithm in the convention ``dilog(1 - x) = Li2(x)``."""

    nargs = 1

    @classmethod
    def eval(cls, u):
        if u == 1:
            return sp.Integer(0)
        if u.is_zero:
            return sp.pi**2 / 6

    def fdiff(self, argindex=1):
        u = self.args[0]
        return sp.log(u) / (1 - u)


_BUILTINS = {
    "exp": sp.exp,
    "ln": sp.log,
    "log": sp.log,
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "arcsin": sp.asin,
    "arccos": sp.acos,
    "arctan": sp.atan,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "arcsinh": sp.asinh,
    "arctanh": sp.atanh,
    "arccosh": sp.acosh,
    "arcsech": sp.asech,
    "erf": sp.erf,
    "Ei": sp.Ei,
}

for _name, _cls in _BUILTINS.items():
    fd = FunctionDef(name=_name, arity=1, cls=_cls, builtin=True)
    _CATALOG[_name] = fd
    _BY_CLASS.setdefault(_cls, fd)

_dilog_def = FunctionDef(name="dilog", arity=1, cls=dilog, builtin=True)
dilog._fdef = None  # eval and fdiff are hard-coded above
_register(_dilog_def)

# Printing names for builtins whose sympy name differs from the catalog name.
PRINT_NAMES = {
    sp.log: "ln",
    sp.asin: "arcsin",
    sp.acos: "arccos",
    sp.atan: "arctan",
    sp.asinh: "arcsinh",
    sp.atanh: "arctanh",
    sp.acosh: "arccosh",
    sp.asech: "arcsech",
}


def _builtin_families():
    n, x = sp.symbols("n x")
    F = declare_function("Fibonacci", 2, family=True)
    register_function(
        "Fibonacci",
        (n, x),
        ((n - 1) * x * F(n, x) + 2 * n * F(n - 1, x)) / (x**2 + 4),
        value_at_zero=sp.sin(n * sp.pi / 2) ** 2,
        recurrence=x * F(n - 1, x) + F(n - 2, x),
    )
    T = declare_function("ChebyshevT", 2, family=True)
    register_function(
        "ChebyshevT",
        (n, x),
        n * (T(n - 1, x) - x * T(n, x)) / (1 - x**2),
        value_at_zero=sp.cos(n * sp.pi / 2),
        recurrence=2 * x * T(n - 1, x) - T(n - 2, x),
    )
    H = declare_function("HermiteH", 2, family=True)
    register_function(
        "HermiteH",
        (n, x),
        2 * n * H(n - 1, x),
        value_at_zero=2**n * sp.sqrt(sp.pi) / sp.gamma((1 - n) / 2),
        recurrence=2 * x * H(n - 1, x) - 2 * (n - 1) * H(n - 2, x),
    )


_builtin_families()


def function_applications(e):
    """All function applications in ``e`` (catalog or not)."""
    return [a for a in sp.preorder_traversal(e) if isinstance(a, sp.Function)]


def check_catalog(e):
    """Raise ``UnknownFunctionError`` for applications outside the catalog."""
    for app in function_applications(e):
        if isinstance(app, sp.Integral):
            continue
        if type(app) not in _BY_CLASS and not type(app).__name__ in ("factorial", "gamma"):
            raise UnknownFunctionError(
                f"unknown function {type(app).__name__!r}", obj=type(app).__name__
            )


def differentiate(e, var, times=1):
    """Exact derivative using catalog rules (families expand by their rule)."""
    check_catalog(e)
    for _ in range(times):
        e = sp.diff(e, var)
    return e


# ---------------------------------------------------------------------------
# term form


def _is_rational_in(e, var):
    # x-free factors (parameters, pi, exp(pi/2), ...) count as coefficients
    if var not in e.free_symbols:
        return True
    return e.is_rational_function(var)


def split_term(term, var):
    """Return ``(rational part, kernel)`` for one product term."""
    rat, ker = [], []
    for fac in sp.Mul.make_args(term):
        (rat if _is_rational_in(fac, var) else ker).append(fac)
    return sp.Mul(*rat), sp.Mul(*ker)


def rationally_dependent(t1, t2, var):
    """Quotient ``t1/t2`` as a :class:`RatFun` if it is rational in ``var``, else ``None``."""
    t1, t2 = sp.sympify(t1), sp.sympify(t2)
    if t2 == 0 or t1 == 0:
        return None
    q = sp.powsimp(t1 / t2)
    if not _is_rational_in(q, var):
        q = sp.powsimp(sp.expand_power_base(q, force=False), combine="exp")
        if not _is_rational_in(q, var):
            return None
    return RatFun.from_expr(q, var)


@dataclass
class KernelBasis:
    """Representatives of the rationally independent kernel classes seen so far."""

    var: sp.Symbol
    kernels: list = field(default_factory=list)

    def classify(self, kernel):
        """Index of ``kernel``'s class and the rational factor kernel/representative."""
        for i, rep in enumerate(self.kernels):
            if kernel == rep:
                return i, sp.Integer(1)
        for i, rep in enumerate(self.kernels):
            q = rationally_dependent(kernel, rep, self.var)
            if q is not None:
                return i, q.as_expr()
        self.kernels.append(kernel)
        return len(self.kernels) - 1, sp.Integer(1)


@dataclass
class TermForm:
    """``sum(coeff_i * kernel_i)`` with pairwise rationally independent kernels."""

    var: sp.Symbol
    terms: list  # list of (coefficient Expr rational in var, kernel Expr)

    def as_expr(self):
        return sp.Add(*[c * k for c, k in self.terms])

    def coefficient_vector(self, basis: KernelBasis):
        out = {}
        for c, k in self.terms:
            i, q = basis.classify(k)
            out[i] = sp.cancel(out.get(i, 0) + c * q)
        return out


def _check_representable(e, var):
    for p in e.atoms(sp.Pow):
        b, ex = p.args
        if var in ex.free_symbols:
            raise NotTermRepresentableError(f"power with variable exponent: {p}", obj=p)
        if isinstance(b, sp.Add) and not ex.is_number and var in b.free_symbols:
            raise NotTermRepresentableError(f"symbolic power of a sum: {p}", obj=p)


def expand_terms(e, var):
    """Distribute products over sums without splitting fractional powers of sums."""
    e = sp.expand(e, trig=False, log=False, power_base=False, multinomial=False)

    def wants(p):
        return (p.is_Pow and p.exp.is_Integer and p.exp > 1 and isinstance(p.base, sp.Add)
                and not _is_rational_in(p.base, var))

    if any(wants(p) for p in e.atoms(sp.Pow)):
        e = e.replace(wants, sp.expand_multinomial)
        e = sp.expand(e, trig=False, log=False, power_base=False, multinomial=False)
    return e


def to_term_form(e, var, basis: KernelBasis | None = None) -> TermForm:
    """Expand and merge rationally dependent kernels into coefficients."""
    e = expand_terms(sp.sympify(e), var)
    _check_representable(e, var)
    basis = basis if basis is not None else KernelBasis(var)
    acc: dict[int, sp.Expr] = {}
    order = []
    for term in sp.Add.make_args(e):
        if term == 0:
            continue
        rat, ker = split_term(term, var)
        i, q = basis.classify(ker)
        if i not in acc:
            acc[i] = sp.Integer(0)
            order.append(i)
        acc[i] = acc[i] + rat * q
    terms = []
    for i in order:
        c = sp.cancel(sp.together(acc[i]))
        if c != 0:
            terms.append((c, basis.kernels[i]))
    return TermForm(var, terms)


# ---------------------------------------------------------------------------
# families


def _family_groups(e):
    groups: dict[tuple, dict[int, sp.Expr]] = {}
    for app in e.atoms(sp.Function):
        fdef = _BY_CLASS.get(type(app))
        if fdef is None or not fdef.family:
            continue
        idx, rest = app.args[0], app.args[1:]
        c, base = sp.sympify(idx).as_coeff_Add()
        if not c.is_Integer:
            fl = sp.floor(c)
            base, c = base + (c - fl), fl
        key = (type(app), rest, base)
        groups.setdefault(key, {})[int(c)] = app
    return groups


def family_floors(exprs):
    """Common reduction floor per family group across several expressions."""
    floors = {}
    for e in exprs:
        for key, members in _family_groups(e).items():
            fdef = _BY_CLASS[key[0]]
            order = max(fdef.recurrence_order, 1)
            base = key[2]
            anchor = 0 if base.free_symbols else max(members)
            lo = min([anchor - order] + list(members))
            floors[key] = min(floors.get(key, lo), lo)
    return floors


def family_reduce(e, floors=None):
    """Rewrite family members so only the lowest ``order`` shifts remain.

    The floor of a group defaults to ``min(-order, lowest shift present)``
    relative to the symbolic part of the index, which maps ``F(n, x)`` to
    ``F(n-1, x)`` and ``F(n-2, x)`` for a two-term recurrence.
    """
    e = sp.sympify(e)
    if floors is None:
        floors = family_floors([e])
    while True:
        groups = _family_groups(e)
        todo = None
        for key, members in groups.items():
            fdef = _BY_CLASS[key[0]]
            lo = floors.get(key)
            if lo is None:
                lo = family_floors([e])[key]
            if fdef.recurrence is None:
                if len(members) > 1:
                    raise MissingRecurrenceError(
                        f"family {fdef.name} needs a recurrence to reduce {sorted(members)}",
                        obj=fdef.name,
                    )
                continue
            top = max(members)
            if top > lo + fdef.recurrence_order - 1:
                todo = (fdef, members[top])
                break
        if todo is None:
            return e
        fdef, app = todo
        e = e.xreplace({app: fdef.recurrence(*app.args)})
