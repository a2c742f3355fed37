"""Expression and table rendering: ascii (re-parseable), unicode, latex.

The ascii output is the wire format: parse(render(e, "ascii")) must give back
an expression equal to e.  Latex strings are display-only.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .expr import (
    Expr, Const, Sym, Add, Mul, Pow, Fun, ONE, coeff_rest, _scale,
)

FORMATS = ("ascii", "unicode", "latex")


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        if e.value < 0:
            return 5
        if e.value.denominator != 1:
            return 20  # renders as a division
        return 40
    if isinstance(e, Add):
        return 10
    if isinstance(e, Mul):
        return 20
    if isinstance(e, Pow):
        return 30
    return 40  # Sym, Fun


def _infix(e: Expr, ctx: int, times: str, minus: str) -> str:
    s = _infix_raw(e, times, minus)
    if _prec(e) < ctx:
        return "(" + s + ")"
    return s


def _infix_raw(e: Expr, times: str, minus: str) -> str:
    if isinstance(e, Const):
        if e.value.denominator == 1:
            s = str(e.value.numerator)
        else:
            s = f"{e.value.numerator}/{e.value.denominator}"
        return s.replace("-", minus, 1)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Add):
        parts: list[str] = []
        for i, t in enumerate(e.terms):
            c, rest = coeff_rest(t)
            if c < 0:
                body = _infix(_scale(rest, -c), 15, times, minus)
                parts.append((minus if i == 0 else f" {minus} ") + body)
            else:
                body = _infix(t, 15, times, minus)
                parts.append(body if i == 0 else f" + {body}")
        return "".join(parts)
    if isinstance(e, Mul):
        factors = list(e.factors)
        lead = ""
        if isinstance(factors[0], Const) and factors[0].value < 0 and len(factors) > 1:
            lead = minus
            c = -factors[0].value
            factors = factors[1:] if c == 1 else [Const(c)] + factors[1:]
        body = times.join(_infix(f, 20, times, minus) for f in factors)
        return lead + body
    if isinstance(e, Pow):
        return _infix(e.base, 31, times, minus) + "^" + _infix(e.exponent, 30, times, minus)
    if isinstance(e, Fun):
        return f"{e.name}({_infix(e.arg, 0, times, minus)})"
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# LaTeX
# ---------------------------------------------------------------------------

_LATEX_FUN = {"ln": r"\ln", "sin": r"\sin", "cos": r"\cos", "atan": r"\arctan"}


def _latex_const(v: Fraction) -> str:
    sign = "-" if v < 0 else ""
    v = abs(v)
    if v.denominator == 1:
        return f"{sign}{v.numerator}"
    return sign + r"\frac{%d}{%d}" % (v.numerator, v.denominator)


def _latex_join(parts: Iterable[str]) -> str:
    out = ""
    for p in parts:
        if out and out[-1].isalnum() and (p[:1].isalnum() or p.startswith("\\")):
            out += " "
        out += p
    return out


def _neg_int_exp(f: Expr) -> bool:
    return (isinstance(f, Pow) and isinstance(f.exponent, Const)
            and f.exponent.value.denominator == 1 and f.exponent.value < 0)


def _latex(e: Expr, ctx: int = 0) -> str:
    if isinstance(e, Const):
        s = _latex_const(e.value)
        if e.value < 0 and ctx >= 20:
            return r"\left(%s\right)" % s
        return s
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Fun):
        if e.name == "exp":
            return "e^{%s}" % _latex(e.arg, 0)
        return "%s(%s)" % (_LATEX_FUN[e.name], _latex(e.arg, 0))
    if isinstance(e, Add):
        parts: list[str] = []
        for i, t in enumerate(e.terms):
            c, rest = coeff_rest(t)
            if c < 0:
                body = _latex(_scale(rest, -c), 15)
                parts.append(("-" if i == 0 else " - ") + body)
            else:
                parts.append(("" if i == 0 else " + ") + _latex(t, 15))
        s = "".join(parts)
        if ctx >= 20:
            return r"\left(%s\right)" % s
        return s
    if isinstance(e, Pow):
        if _neg_int_exp(e):
            return _latex_fraction([ONE], [Pow(e.base, Const(-e.exponent.value))], ctx)
        base = _latex(e.base, 31)
        return "%s^{%s}" % (base, _latex(e.exponent, 0))
    if isinstance(e, Mul):
        num: list[Expr] = []
        den: list[Expr] = []
        for f in e.factors:
            if _neg_int_exp(f):
                den.append(Pow(f.base, Const(-f.exponent.value)))
            else:
                num.append(f)
        if den:
            return _latex_fraction(num or [ONE], den, ctx)
        return _latex_product(num, ctx)
    raise TypeError(f"not an Expr: {e!r}")


def _latex_product(factors: list[Expr], ctx: int) -> str:
    if not factors:
        return "1"
    lead = ""
    negative = False
    if isinstance(factors[0], Const) and len(factors) > 1:
        c = factors[0].value
        negative = c < 0
        if c == -1:
            lead = "-"
            factors = factors[1:]
        else:
            lead = _latex_const(c)
            factors = factors[1:]
    parts = [_latex(f, 20) for f in factors]
    s = _latex_join([lead] + parts if lead else parts)
    if negative and ctx >= 20:
        return r"\left(%s\right)" % s
    return s


def _latex_fraction(num: list[Expr], den: list[Expr], ctx: int) -> str:
    sign = ""
    if num and isinstance(num[0], Const):
        c = num[0].value
        if c < 0:
            sign = "-"
            num = ([Const(-c)] if c != -1 or len(num) == 1 else []) + num[1:]
    # Pow with exponent 1 may appear transiently from negation; unwrap it.
    den = [f.base if isinstance(f, Pow) and f.exponent == ONE else f for f in den]
    num = [f for f in num if f != ONE] or [ONE]
    n = _latex_join(_latex(f, 15) for f in num)
    d = _latex_join(_latex(f, 15) for f in den)
    return sign + r"\frac{%s}{%s}" % (n, d)


def render(e: Expr, format: str = "ascii") -> str:
    """Render a canonical expression in the requested format."""
    if format == "ascii":
        return _infix(e, 0, "*", "-")
    if format == "unicode":
        return _infix(e, 0, "·", "−")
    if format == "latex":
        return _latex(e, 0)
    raise ValueError(f"unknown format {format!r} (expected one of {FORMATS})")


_SIGN = {1: "+", -1: "-"}
_INT = {"ascii": "int", "unicode": "∫", "latex": r"\int"}


def render_table(table, format: str = "ascii") -> str:
    """Render an IBP table: one line per row (sign, u, dv), residual beneath."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r} (expected one of {FORMATS})")
    var = table.problem.var
    rows = [(_SIGN[r.sign], render(r.u_entry, format), render(r.dv_entry, format))
            for r in table.rows]
    if format == "latex":
        lines = [r"\begin{array}{c|cc}", r"+/- & u & dv \\ \hline"]
        lines += [f"{s} & {u} & {dv} " + r"\\" for s, u, dv in rows]
        lines.append(r"\end{array}")
        if len(table.rows) >= 2:
            last = table.rows[-1]
            integrand = render(_residual_integrand(last), format)
            lines.append(r"%s\int %s\,d%s" % ("-" if last.sign < 0 else "",
                                              integrand, var))
        return "\n".join(lines)
    wu = max(len(u) for _, u, _ in rows)
    lines = [f"{s}  {u.ljust(wu)}  {dv}".rstrip() for s, u, dv in rows]
    if len(table.rows) >= 2:
        last = table.rows[-1]
        integrand = render(_residual_integrand(last), format)
        sign = "-" if last.sign < 0 else "+"
        lines.append(f"residual: {sign} {_INT[format]} {integrand} d{var}")
    return "\n".join(lines)


def _residual_integrand(last_row) -> Expr:
    from .expr import mul

    return mul(last_row.u_entry, last_row.dv_entry)
