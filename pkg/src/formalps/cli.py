"""Command line front end.

::

    formalps fps "sin(x)" --var x
    formalps fps "exp(x)" --point infinity
    formalps simple-de "Fibonacci(n,x)"
    formalps simple-re "x/(1-x-x^2)"
    formalps verify "exp(x)*sin(x)/x" -N 12

Exit status is 0 on success, 1 for a solver error and 2 for a parse
error.  With ``--format structured`` results and errors are printed as
JSON (schema in ``docs/structured.md``).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import mpmath
import sympy as sp

from .errors import FPSError, OracleError, ParseError, UnknownFunctionError
from .expr import declare_function, register_function
from .oracle import L as ORACLE_LOG, truncated_series
from .parser import Parser, parse_expression, parse_point
from .pipeline import LOCAL, METHODS, formal_power_series
from .recurrence import convert_de_to_re
from .series import eval_coefficient, eval_log_coefficient, partial_sum, render
from .simple_de import find_lowest_de

log = logging.getLogger("formalps.cli")

MARK = sp.Dummy("log")

#: numeric check of ``verify``: terms, distance from the point, digits, tolerance
NUMERIC_TERMS = 25
NUMERIC_OFFSET = sp.Rational(1, 10)
NUMERIC_DIGITS = 40
NUMERIC_TOL = mpmath.mpf("1e-10")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="formalps", description="Exact formal Laurent-Puiseux series.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, *, series=True):
        sp_.add_argument("expression")
        sp_.add_argument("--var", default="x", help="series variable (default x)")
        sp_.add_argument("--kmax", type=int, default=5, help="largest DE degree searched")
        sp_.add_argument("--families", metavar="FILE", help="JSON file declaring extra functions")
        sp_.add_argument("--trace", type=int, default=0, choices=range(5), metavar="0..4")
        sp_.add_argument("--format", choices=("text", "structured"), default="text")
        if series:
            sp_.add_argument("--point", default="0", help="rational number, infinity or -infinity")
            sp_.add_argument("--dir", choices=("left", "right", "both"), default=None)
            sp_.add_argument("--method", choices=METHODS, default="auto")
            sp_.add_argument("--no-explicit", action="store_true",
                             help="keep every denominator factor as a sum over its roots")
            sp_.add_argument("--real", action="store_true",
                             help="keep only real parts of constant terms")

    fps = sub.add_parser("fps", help="closed-form series")
    common(fps)
    fps.add_argument("--verify", type=int, metavar="N", help="also verify coefficients up to N")
    common(sub.add_parser("simple-de", help="lowest-degree simple DE"), series=False)
    common(sub.add_parser("simple-re", help="recurrence of the lowest simple DE"), series=False)
    ver = sub.add_parser("verify", help="compare the closed form with a truncated expansion")
    common(ver)
    ver.add_argument("-N", "--order", type=int, default=12, dest="verify")
    return p


def load_families(path):
    """Register the functions declared in a JSON file.

    All names are declared first, so derivative rules may refer to each
    other (``newAi`` / ``newAiPrime``).
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc.get("functions", [])
    for ent in entries:
        family = "recurrence" in ent or len(ent["params"]) > 1
        declare_function(ent["name"], len(ent["params"]), family=family)
    for ent in entries:
        symbols = {p: sp.Symbol(p) for p in ent["params"]}
        params = [symbols[p] for p in ent["params"]]

        def field(key):
            src = ent.get(key)
            return None if src is None else Parser(src, symbols).parse()

        register_function(
            ent["name"],
            params,
            field("derivative"),
            value_at_zero=field("value_at_zero"),
            recurrence=field("recurrence"),
        )
    return [e["name"] for e in entries]


class _TraceFormatter(logging.Formatter):
    def format(self, record):
        stage = record.name.split(".")[-1]
        return f"FPS/{stage}: {record.getMessage()}"


def _setup_trace(level):
    logger = logging.getLogger("formalps")
    for h in list(logger.handlers):
        logger.removeHandler(h)
    if level <= 0:
        logger.setLevel(logging.WARNING)
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_TraceFormatter())
    logger.addHandler(handler)
    logger.propagate = False
    if level == 1:
        logging.getLogger("formalps").setLevel(logging.WARNING)
        logging.getLogger("formalps.pipeline").setLevel(logging.INFO)
    elif level == 2:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.DEBUG)


def _series_kwargs(args):
    return dict(
        point=parse_point(args.point),
        direction=args.dir,
        method=args.method,
        kmax=args.kmax,
        explicit=not args.no_explicit,
        real=args.real,
    )


def _reference(local, order):
    """Exponent -> ``(plain, log)`` coefficients of ``local`` up to ``x^order``.

    The package oracle is tried first; compositions it cannot expand
    (arguments with a pole, as at infinity) fall back to ``sympy.series``.
    """
    try:
        s = truncated_series(local, LOCAL, order + 1)
        items = s.coeffs.items()
    except OracleError:
        log.info("oracle failed, using sympy.series as reference")
        try:
            ser = sp.series(local, LOCAL, 0, order + 1).removeO()
        except (sp.PoleError, NotImplementedError, ValueError) as exc:
            raise OracleError(f"no reference expansion available: {exc}", obj=local) from None
        items = []
        for term in sp.Add.make_args(sp.expand(ser)):
            if term.has(sp.Order) or any(a.has(LOCAL) for a in term.atoms(sp.exp)):
                continue  # remainders and exponentially small terms
            c, e = sp.Integer(1), sp.Integer(0)
            rest = []
            for fac in sp.Mul.make_args(term):
                b, ex = fac.as_base_exp()
                if b == LOCAL:
                    e += ex
                elif fac == sp.log(LOCAL):
                    rest.append(MARK)
                else:
                    c *= fac
            items.append((sp.Rational(e), c * sp.Mul(*rest)))
    out = {}
    for e, c in items:
        c = sp.expand(sp.sympify(c).subs(MARK, ORACLE_LOG))
        plain, lg = c.subs(ORACLE_LOG, 0), c.coeff(ORACLE_LOG)
        old = out.get(e, (0, 0))
        out[e] = (old[0] + plain, old[1] + lg)
    return out


def verify(f, var, res, order):
    """``(max deviation, count, numeric error)`` of a result against a reference expansion.

    Coefficients (and ``ln`` coefficients) are compared exactly at every
    exponent of the local grid up to ``order``; the numeric check evaluates
    a partial sum at a point ``1/10`` away from the expansion point.  At
    infinity the expansion is asymptotic and the numeric error is ``None``.
    """
    point, direction = res.point, res.direction
    if point == sp.oo:
        local = f.subs(var, 1 / LOCAL)
    elif point == -sp.oo:
        local = f.subs(var, -1 / LOCAL)
    elif direction == "left":
        local = f.subs(var, point - LOCAL)
    else:
        local = f.subs(var, point + LOCAL)
    ref = _reference(local, order)
    exps = {e for e in ref if e <= order}
    dens = {sp.Rational(e).q for e in exps} | {p.n for p in res.sums}
    grid = math.lcm(*[int(d) for d in dens]) if dens else 1
    e = sp.Rational(sp.floor(min(exps))) if exps else sp.Integer(0)
    lows = [sp.sympify(t) for t, _ in res.terms] + [p.exponent(0) for p in res.sums]
    if lows:
        e = min(e, sp.Rational(sp.floor(min(lows, key=float))))
    count, worst = 0, sp.Integer(0)
    while e <= order:
        plain, lg = ref.get(e, (0, 0))
        for got, want in ((eval_coefficient(res, e), plain), (eval_log_coefficient(res, e), lg)):
            dev = sp.Abs(sp.simplify(got - want))
            worst = sp.Max(worst, dev)
        count += 1
        e += sp.Rational(1, grid)
    if point in (sp.oo, -sp.oo):
        return worst, count, None  # asymptotic expansion: no numeric check
    if direction == "left":
        x0 = point - NUMERIC_OFFSET
    else:
        x0 = point + NUMERIC_OFFSET
    with mpmath.workdps(NUMERIC_DIGITS):
        approx = partial_sum(res, NUMERIC_TERMS, x0, NUMERIC_DIGITS)
        exact = mpmath.mpmathify(sp.N(f.subs(var, x0), NUMERIC_DIGITS))
        err = abs(exact - approx)
    return worst, count, err


def _emit_error(exc, fmt, out):
    payload = exc.payload() if isinstance(exc, FPSError) else {"error": "internal", "message": str(exc)}
    if fmt == "structured":
        print(json.dumps(payload, sort_keys=True), file=out)
    else:
        print(f"error: {payload['error']} ({payload.get('stage', '')}): {payload['message']}",
              file=sys.stderr)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    _setup_trace(args.trace)
    try:
        if args.families:
            load_families(args.families)
        var = sp.Symbol(args.var)
        f = parse_expression(args.expression, {args.var: var})
        kwargs = _series_kwargs(args) if args.command in ("fps", "verify") else None
    except (ParseError, UnknownFunctionError) as exc:
        _emit_error(exc, args.format, out)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        _emit_error(ParseError(str(exc)), args.format, out)
        return 2
    try:
        if args.command == "simple-de":
            de = find_lowest_de(f.subs(var, LOCAL), LOCAL, args.kmax)
            user = type(de)(tuple(sp.sympify(c).subs(LOCAL, var) for c in de.coefficients), var)
            text = str(user)
            _print(out, args.format, {"de": text, "degree": de.degree}, text)
            return 0
        if args.command == "simple-re":
            de = find_lowest_de(f.subs(var, LOCAL), LOCAL, args.kmax)
            text = str(convert_de_to_re(de))
            _print(out, args.format, {"re": text, "degree": de.degree}, text)
            return 0
        res = formal_power_series(f, var, **kwargs)
        print(render(res, args.format, var), file=out)
        if args.verify is not None:
            worst, count, err = verify(f, var, res, args.verify)
            dev = worst if worst != 0 else 0
            if err is None:
                ok, status = worst == 0, "numeric check skipped (asymptotic expansion)"
            else:
                ok = worst == 0 and err <= NUMERIC_TOL
                status = "numeric check passed" if err <= NUMERIC_TOL else "numeric check FAILED"
                status += f" (error {mpmath.nstr(err, 3)})"
            print(f"max deviation {dev}/{count}, {status}", file=out)
            return 0 if ok else 1
        return 0
    except FPSError as exc:
        _emit_error(exc, args.format, out)
        return 1


def _print(out, fmt, doc, text):
    if fmt == "structured":
        print(json.dumps(doc, sort_keys=True), file=out)
    else:
        print(text, file=out)


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
