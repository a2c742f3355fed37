"""Symbolic differentiation and the base antiderivative rule table.

These are the "diff." and "int." column engines.  ``differentiate`` is total
on the function whitelist.  ``antiderivative`` is a deliberately small rule
table: constants, rational powers of the variable and of linear shifts,
exp/sin/cos with linear arguments, sums and constant multiples, and rational
functions with an irreducible quadratic denominator (log + arctan after
completing the square).  A miss is not an error: it is the signal that a
table row (or a recursive derivation) is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .expr import (
    Expr, Const, Sym, Add, Mul, Pow, Fun, ZERO, ONE, NEG_ONE,
    add, mul, power, negate, scale, ln, sin, cos, atan,
    coeff_rest, contains_symbol, is_free_of, mul_factors,
    poly_coeffs, poly_expr, _nth_root,
)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative with respect to var, canonicalized."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == var else ZERO
    if isinstance(e, Add):
        return add(*[differentiate(t, var) for t in e.terms])
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.factors):
            df = differentiate(f, var)
            if df == ZERO:
                continue
            rest = e.factors[:i] + e.factors[i + 1:]
            terms.append(mul(df, *rest))
        return add(*terms) if terms else ZERO
    if isinstance(e, Pow):
        b, x = e.base, e.exponent
        if isinstance(x, Const):
            return mul(x, power(b, Const(x.value - 1)), differentiate(b, var))
        db = differentiate(b, var)
        dx = differentiate(x, var)
        # general power: (b^x)' = b^x (x' ln b + x b'/b)
        return mul(e, add(mul(dx, ln(b)), mul(x, db, power(b, -1))))
    if isinstance(e, Fun):
        da = differentiate(e.arg, var)
        if da == ZERO:
            return ZERO
        if e.name == "ln":
            return mul(da, power(e.arg, -1))
        if e.name == "exp":
            return mul(da, e)
        if e.name == "sin":
            return mul(da, cos(e.arg))
        if e.name == "cos":
            return negate(mul(da, sin(e.arg)))
        # atan
        return mul(da, power(add(ONE, power(e.arg, 2)), -1))
    raise TypeError(f"not an Expr: {e!r}")


@dataclass(frozen=True)
class RuleHit:
    antiderivative: Expr
    rule_name: str


def linear_in(e: Expr, var: str) -> Optional[tuple[Fraction, Expr]]:
    """Match e = a*var + b with rational a != 0 and b free of var."""
    if isinstance(e, Sym) and e.name == var:
        return Fraction(1), ZERO
    if isinstance(e, Mul):
        c, rest = coeff_rest(e)
        if isinstance(rest, Sym) and rest.name == var:
            return c, ZERO
        if isinstance(rest, Add):
            sub = linear_in(rest, var)
            if sub is not None:
                return c * sub[0], scale(sub[1], c)
        return None
    if isinstance(e, Add):
        a: Optional[Fraction] = None
        b_terms: list[Expr] = []
        for t in e.terms:
            if is_free_of(t, var):
                b_terms.append(t)
                continue
            c, rest = coeff_rest(t)
            if isinstance(rest, Sym) and rest.name == var and a is None:
                a = c
            else:
                return None
        if a is None:
            return None
        return a, (add(*b_terms) if b_terms else ZERO)
    return None


def _sqrt_expr(v: Fraction) -> Expr:
    """Exact square root of a positive rational, folding perfect squares."""
    rn = _nth_root(v.numerator, 2)
    rd = _nth_root(v.denominator, 2)
    if rn is not None and rd is not None:
        return Const(Fraction(rn, rd))
    return power(Const(v), Fraction(1, 2))


def _monic_quadratic(e: Expr, var: str) -> Optional[tuple[Fraction, Fraction, Fraction]]:
    """Match an irreducible quadratic in var; return (p, q, lead) for
    lead*(var^2 + p*var + q) with p^2 - 4q < 0."""
    cs = poly_coeffs(e, var)
    if not cs or max(cs) != 2:
        return None
    a2 = cs[2]
    p = cs.get(1, Fraction(0)) / a2
    q = cs.get(0, Fraction(0)) / a2
    if p * p - 4 * q >= 0:
        return None
    return p, q, a2


def _quadratic_divmod(n: dict[int, Fraction], p: Fraction, q: Fraction):
    """Divide a polynomial by x^2 + p x + q: quotient plus (c1 x + c0)."""
    rem = dict(n)
    quotient: dict[int, Fraction] = {}
    for k in range(max(rem, default=0), 1, -1):
        c = rem.get(k, Fraction(0))
        if c == 0:
            continue
        quotient[k - 2] = quotient.get(k - 2, Fraction(0)) + c
        rem[k] = Fraction(0)
        rem[k - 1] = rem.get(k - 1, Fraction(0)) - c * p
        rem[k - 2] = rem.get(k - 2, Fraction(0)) - c * q
    return quotient, rem.get(1, Fraction(0)), rem.get(0, Fraction(0))


def _poly_antiderivative(cs: dict[int, Fraction], var: str) -> Expr:
    return poly_expr({k + 1: c / (k + 1) for k, c in cs.items()}, var)


def _rational_quadratic_rule(e: Expr, var: str) -> Optional[RuleHit]:
    """N(var) / (quadratic with negative discriminant) -> log + arctan."""
    quad: Optional[tuple[Fraction, Fraction, Fraction]] = None
    others: list[Expr] = []
    for f in mul_factors(e):
        if quad is None and isinstance(f, Pow) and f.exponent == NEG_ONE:
            mq = _monic_quadratic(f.base, var)
            if mq is not None:
                quad = mq
                continue
        others.append(f)
    if quad is None:
        return None
    n_coeffs = poly_coeffs(mul(*others) if others else ONE, var)
    if n_coeffs is None:
        return None
    p, q, lead = quad
    n_coeffs = {k: c / lead for k, c in n_coeffs.items()}
    quotient, c1, c0 = _quadratic_divmod(n_coeffs, p, q)
    x = Sym(var)
    q_monic = poly_expr({2: Fraction(1), 1: p, 0: q}, var)
    parts: list[Expr] = []
    if quotient:
        parts.append(_poly_antiderivative(quotient, var))
    if c1 != 0:
        parts.append(scale(ln(q_monic), c1 / 2))
    k0 = c0 - c1 * p / 2
    if k0 != 0:
        disc = 4 * q - p * p
        s = _sqrt_expr(disc)
        arg = mul(add(scale(x, 2), Const(p)), power(s, -1))
        parts.append(mul(Const(2 * k0), power(s, -1), atan(arg)))
    anti = add(*parts) if parts else ZERO
    name = "atan_rule" if c1 == 0 and not quotient else "linear_over_quadratic"
    return RuleHit(anti, name)


def antiderivative(e: Expr, var: str) -> Optional[RuleHit]:
    """Rule-table antiderivative of a canonical integrand, without constant.

    Returns None when no rule applies; that is the signal for IBP, not an
    error condition.
    """
    if is_free_of(e, var):
        return RuleHit(mul(e, Sym(var)), "constant")
    if isinstance(e, Add):
        lin = linear_in(e, var)
        if lin is not None:
            # (a*var + b) integrates to (a*var + b)^2 / (2a): keeping the
            # shifted form is what lets a pinned (x - t) chain reproduce the
            # -(x-t)^2/2! cells without further pinning.
            a, _ = lin
            return RuleHit(scale(power(e, 2), 1 / (2 * a)), "shifted_power")
        parts = []
        for t in e.terms:
            hit = antiderivative(t, var)
            if hit is None:
                return None
            parts.append(hit.antiderivative)
        return RuleHit(add(*parts), "sum_split")
    if isinstance(e, Mul):
        free = [f for f in e.factors if is_free_of(f, var)]
        dep = [f for f in e.factors if contains_symbol(f, var)]
        if free:
            sub = antiderivative(mul(*dep), var)
            if sub is None:
                return None
            return RuleHit(mul(*free, sub.antiderivative), "const_factor")
        hit = _rational_quadratic_rule(e, var)
        if hit is not None:
            return hit
        # products of rational-coefficient polynomials integrate term-wise
        cs = poly_coeffs(e, var)
        if cs is not None:
            return RuleHit(_poly_antiderivative(cs, var), "sum_split")
        return None
    if isinstance(e, Sym):  # e == var here; free symbols handled above
        return RuleHit(scale(power(e, 2), Fraction(1, 2)), "power")
    if isinstance(e, Pow):
        if not isinstance(e.exponent, Const):
            return None
        qv = e.exponent.value
        if isinstance(e.base, Sym) and e.base.name == var:
            if qv == -1:
                return RuleHit(ln(e.base), "recip")
            return RuleHit(scale(power(e.base, Const(qv + 1)), 1 / (qv + 1)), "power")
        lin = linear_in(e.base, var)
        if lin is not None:
            a, _ = lin
            if qv == -1:
                return RuleHit(scale(ln(e.base), 1 / a), "shifted_power")
            return RuleHit(scale(power(e.base, Const(qv + 1)), 1 / (a * (qv + 1))),
                           "shifted_power")
        if qv == -1:
            return _rational_quadratic_rule(e, var)
        if qv.denominator == 1 and qv > 0:
            cs = poly_coeffs(e, var)
            if cs is not None:
                return RuleHit(_poly_antiderivative(cs, var), "sum_split")
        return None
    if isinstance(e, Fun):
        lin = linear_in(e.arg, var)
        if lin is None:
            return None
        a, _ = lin
        if e.name == "exp":
            return RuleHit(scale(e, 1 / a), "exp_linear")
        if e.name == "sin":
            return RuleHit(scale(cos(e.arg), -1 / a), "sin_linear")
        if e.name == "cos":
            return RuleHit(scale(sin(e.arg), 1 / a), "cos_linear")
        return None  # ln and atan have no base rule by design
    return None


def antiderivative_with_constant(e: Expr, var: str, pin: Expr) -> Optional[Expr]:
    """Antiderivative plus a caller-chosen constant of integration.

    The pin must be free of var; it is how the Taylor derivation selects
    (x - t) as the first antiderivative of -1.
    """
    if contains_symbol(pin, var):
        raise ValueError(f"pin must be free of {var!r}")
    hit = antiderivative(e, var)
    if hit is None:
        return None
    return add(hit.antiderivative, pin)
