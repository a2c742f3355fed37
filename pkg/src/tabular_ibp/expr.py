"""Immutable expression trees with exact rational coefficients.

Every value flowing through the engine is an ``Expr``: a constant, a symbol,
a flat sum/product, a power, or an application of one of the whitelisted
functions (ln, exp, sin, cos, atan).  Canonical form keeps sums and products
flattened, sorted, and with like terms collected, but deliberately does NOT
distribute products over sums: a table cell like ``(x^2 - 3*x)*sin(x)`` must
survive canonicalization intact.  Structural equality of canonical forms is
therefore weaker than mathematical equality; ``equals`` closes most of the
gap by expanding both sides before comparing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

# Exact rational scalars.  fractions.Fraction already maintains the needed
# invariants: positive denominator, gcd-reduced, arbitrary precision.
Rational = Fraction

FUNCTIONS = ("ln", "exp", "sin", "cos", "atan")


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Add:
    terms: tuple["Expr", ...]


@dataclass(frozen=True)
class Mul:
    factors: tuple["Expr", ...]


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"


@dataclass(frozen=True)
class Fun:
    name: str
    arg: "Expr"


Expr = Union[Const, Sym, Add, Mul, Pow, Fun]

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
NEG_ONE = Const(Fraction(-1))

# Bound on multinomial expansion of (sum)^n inside expand(); anything larger
# is left unexpanded (equality checks then fall back to numerics).
_EXPAND_POW_LIMIT = 20


def const(value) -> Const:
    """Exact rational constant from an int, Fraction, or 'p/q' string."""
    return Const(Fraction(value))


def sym(name: str) -> Sym:
    return Sym(name)


# ---------------------------------------------------------------------------
# Canonical ordering: Const < Sym < Pow < Fun < Mul < Add, ties recursive.
# ---------------------------------------------------------------------------

def sort_key(e: Expr):
    if isinstance(e, Const):
        return (0, (e.value.numerator, e.value.denominator))
    if isinstance(e, Sym):
        return (1, e.name)
    if isinstance(e, Pow):
        return (2, sort_key(e.base), sort_key(e.exponent))
    if isinstance(e, Fun):
        return (3, e.name, sort_key(e.arg))
    if isinstance(e, Mul):
        return (4,) + tuple(sort_key(f) for f in e.factors)
    if isinstance(e, Add):
        return (5,) + tuple(sort_key(t) for t in e.terms)
    raise TypeError(f"not an Expr: {e!r}")


def coeff_rest(t: Expr) -> tuple[Fraction, Expr]:
    """Split a canonical term into (rational coefficient, remaining factor)."""
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, (rest[0] if len(rest) == 1 else Mul(rest))
    return Fraction(1), t


def _scale(rest: Expr, c: Fraction) -> Expr:
    """c * rest for canonical const-free rest, result canonical."""
    if c == 0:
        return ZERO
    if rest == ONE:
        return Const(c)
    if c == 1:
        return rest
    if isinstance(rest, Add):
        return _build_add([scale(t, c) for t in rest.terms])
    if isinstance(rest, Mul):
        factors = list(rest.factors)
        for i, f in enumerate(factors):
            if isinstance(f, Add):
                factors[i] = scale(f, c)
                factors.sort(key=sort_key)
                return Mul(tuple(factors))
        return Mul((Const(c),) + rest.factors)
    return Mul((Const(c), rest))


def scale(e: Expr, c) -> Expr:
    """Multiply a canonical expression by a rational, staying canonical."""
    c = Fraction(c)
    if isinstance(e, Add):
        return _build_add([scale(t, c) for t in e.terms])
    co, rest = coeff_rest(e)
    return _scale(rest, co * c)


# ---------------------------------------------------------------------------
# Canonical builders.  All arguments must already be canonical.
# ---------------------------------------------------------------------------

def _build_add(terms: Iterable[Expr]) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if isinstance(t, Add):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const_sum = Fraction(0)
    groups: dict[Expr, Fraction] = {}
    order: list[Expr] = []
    for t in flat:
        c, rest = coeff_rest(t)
        if rest == ONE:
            const_sum += c
            continue
        if rest in groups:
            groups[rest] += c
        else:
            groups[rest] = c
            order.append(rest)
    out = [_scale(rest, groups[rest]) for rest in order if groups[rest] != 0]
    out.sort(key=sort_key)
    if const_sum != 0:
        out.insert(0, Const(const_sum))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _build_mul(factors: Iterable[Expr]) -> Expr:
    coeff = Fraction(1)
    exps: dict[Expr, list[Expr]] = {}
    order: list[Expr] = []
    stack = list(factors)
    while stack:
        f = stack.pop()
        if isinstance(f, Const):
            if f.value == 0:
                return ZERO
            coeff *= f.value
        elif isinstance(f, Mul):
            stack.extend(f.factors)
        else:
            base, e = (f.base, f.exponent) if isinstance(f, Pow) else (f, ONE)
            if isinstance(base, Add) and e == ONE:
                # Normalize the rational content so the base can collect
                # against content-free powers of the same sum.
                c = _add_content(base)
                if c != 1:
                    coeff *= c
                    base = _strip_content(base, c)
            if base not in exps:
                exps[base] = []
                order.append(base)
            exps[base].append(e)
    out: list[Expr] = []
    requeue: list[Expr] = []
    for base in order:
        es = exps[base]
        e_sum = es[0] if len(es) == 1 else _build_add(es)
        p = _build_pow(base, e_sum)
        if isinstance(p, (Const, Mul)):
            requeue.append(p)
        else:
            out.append(p)
    if requeue:
        # Power rebuilding produced constants or products (fold, content
        # extraction, distribution); run them through collection again.
        return _build_mul([Const(coeff)] + out + requeue)
    out.sort(key=sort_key)
    if not out:
        return Const(coeff)
    if coeff != 1:
        # Fold the scalar into a sum factor when there is one; negated and
        # scaled sums then cancel term-by-term against flat sums.
        for i, f in enumerate(out):
            if isinstance(f, Add):
                out[i] = scale(f, coeff)
                coeff = Fraction(1)
                out.sort(key=sort_key)
                break
    if coeff != 1:
        out.insert(0, Const(coeff))
    if len(out) == 1:
        return out[0]
    return Mul(tuple(out))


def _nth_root(n: int, q: int) -> Optional[int]:
    """Exact q-th root of a nonnegative integer, if one exists."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    return None


def _rational_root_pow(v: Fraction, e: Fraction) -> Optional[Fraction]:
    """v**e as an exact rational for positive v and fractional e, if exact."""
    if v <= 0:
        return None
    rn = _nth_root(v.numerator, e.denominator)
    rd = _nth_root(v.denominator, e.denominator)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd) ** e.numerator


def _is_int(e: Expr) -> bool:
    return isinstance(e, Const) and e.value.denominator == 1


def _add_content(a: Add) -> Fraction:
    """Positive rational gcd of the term coefficients of a canonical sum."""
    num_gcd = 0
    den_lcm = 1
    for t in a.terms:
        c = coeff_rest(t)[0]
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(num_gcd, den_lcm)


def _strip_content(a: Add, c: Fraction) -> Expr:
    return _build_add([scale(t, 1 / c) for t in a.terms])


def _build_pow(base: Expr, e: Expr) -> Expr:
    if e == ZERO:
        return ONE
    if e == ONE:
        return base
    if isinstance(base, Const):
        if base.value == 0:
            if isinstance(e, Const) and e.value > 0:
                return ZERO
            return Pow(base, e)  # 0^negative or 0^symbolic: leave literal
        if base.value == 1:
            return ONE
        if isinstance(e, Const):
            if e.value.denominator == 1:
                return Const(base.value ** e.value.numerator)
            folded = _rational_root_pow(base.value, e.value)
            if folded is not None:
                return Const(folded)
        return Pow(base, e)
    if isinstance(base, Pow) and _is_int(e):
        inner = base.exponent
        # (b^p)^k -> b^(p*k) is safe for integer k when p is an integer or
        # when b is a positive constant (e.g. (12^(1/2))^2 -> 12).
        if _is_int(inner) or (isinstance(base.base, Const) and base.base.value > 0):
            return _build_pow(base.base, _build_mul([inner, e]))
    if isinstance(base, Mul) and _is_int(e):
        return _build_mul([_build_pow(f, e) for f in base.factors])
    if isinstance(base, Add) and _is_int(e):
        c = _add_content(base)
        if c != 1:
            stripped = _strip_content(base, c)
            return _build_mul([Const(c ** e.value.numerator), _build_pow(stripped, e)])
    return Pow(base, e)


_FUN_FOLDS = {
    ("ln", Fraction(1)): ZERO,
    ("exp", Fraction(0)): ONE,
    ("sin", Fraction(0)): ZERO,
    ("cos", Fraction(0)): ONE,
    ("atan", Fraction(0)): ZERO,
}


def _build_fun(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if isinstance(arg, Const):
        hit = _FUN_FOLDS.get((name, arg.value))
        if hit is not None:
            return hit
    return Fun(name, arg)


def canonicalize(e: Expr) -> Expr:
    """Canonical form: flattened, sorted, like terms collected, folds applied.

    Idempotent and value-preserving on the common domain.  No product/sum
    distribution and no trig/log identities.
    """
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Add):
        return _build_add([canonicalize(t) for t in e.terms])
    if isinstance(e, Mul):
        return _build_mul([canonicalize(f) for f in e.factors])
    if isinstance(e, Pow):
        return _build_pow(canonicalize(e.base), canonicalize(e.exponent))
    if isinstance(e, Fun):
        return _build_fun(e.name, canonicalize(e.arg))
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Convenience constructors (canonicalize their arguments).
# ---------------------------------------------------------------------------

def add(*terms: Expr) -> Expr:
    return _build_add([canonicalize(t) for t in terms])


def mul(*factors: Expr) -> Expr:
    return _build_mul([canonicalize(f) for f in factors])


def power(base: Expr, e) -> Expr:
    if not isinstance(e, (Const, Sym, Add, Mul, Pow, Fun)):
        e = const(e)
    return _build_pow(canonicalize(base), canonicalize(e))


def negate(e: Expr) -> Expr:
    return mul(NEG_ONE, e)


def subtract(a: Expr, b: Expr) -> Expr:
    return add(a, negate(b))


def divide(a: Expr, b: Expr) -> Expr:
    return mul(a, power(b, -1))


def ln(a: Expr) -> Expr:
    return _build_fun("ln", canonicalize(a))


def exp(a: Expr) -> Expr:
    return _build_fun("exp", canonicalize(a))


def sin(a: Expr) -> Expr:
    return _build_fun("sin", canonicalize(a))


def cos(a: Expr) -> Expr:
    return _build_fun("cos", canonicalize(a))


def atan(a: Expr) -> Expr:
    return _build_fun("atan", canonicalize(a))


def add_terms(e: Expr) -> tuple[Expr, ...]:
    return e.terms if isinstance(e, Add) else (e,)


def mul_factors(e: Expr) -> tuple[Expr, ...]:
    return e.factors if isinstance(e, Mul) else (e,)


def free_symbols(e: Expr) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Sym):
        return frozenset((e.name,))
    if isinstance(e, Add):
        return frozenset().union(*(free_symbols(t) for t in e.terms))
    if isinstance(e, Mul):
        return frozenset().union(*(free_symbols(f) for f in e.factors))
    if isinstance(e, Pow):
        return free_symbols(e.base) | free_symbols(e.exponent)
    return free_symbols(e.arg)


def contains_symbol(e: Expr, name: str) -> bool:
    if isinstance(e, Const):
        return False
    if isinstance(e, Sym):
        return e.name == name
    if isinstance(e, Add):
        return any(contains_symbol(t, name) for t in e.terms)
    if isinstance(e, Mul):
        return any(contains_symbol(f, name) for f in e.factors)
    if isinstance(e, Pow):
        return contains_symbol(e.base, name) or contains_symbol(e.exponent, name)
    return contains_symbol(e.arg, name)


def is_free_of(e: Expr, name: str) -> bool:
    return not contains_symbol(e, name)


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Replace every occurrence of a symbol, then canonicalize."""
    rep = canonicalize(replacement)

    def walk(x: Expr) -> Expr:
        if isinstance(x, Const):
            return x
        if isinstance(x, Sym):
            return rep if x.name == name else x
        if isinstance(x, Add):
            return Add(tuple(walk(t) for t in x.terms))
        if isinstance(x, Mul):
            return Mul(tuple(walk(f) for f in x.factors))
        if isinstance(x, Pow):
            return Pow(walk(x.base), walk(x.exponent))
        return Fun(x.name, walk(x.arg))

    return canonicalize(walk(e))


# ---------------------------------------------------------------------------
# Expansion-based equality.
# ---------------------------------------------------------------------------

def _mul_expand(a: Expr, b: Expr) -> Expr:
    at = a.terms if isinstance(a, Add) else (a,)
    bt = b.terms if isinstance(b, Add) else (b,)
    if len(at) == 1 and len(bt) == 1:
        return _build_mul([a, b])
    return _build_add([_build_mul([ta, tb]) for ta in at for tb in bt])


def _expand(e: Expr) -> Expr:
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Fun):
        return _build_fun(e.name, _expand(e.arg))
    if isinstance(e, Add):
        return _build_add([_expand(t) for t in e.terms])
    if isinstance(e, Pow):
        base = _expand(e.base)
        ex = _expand(e.exponent)
        if isinstance(base, Add) and _is_int(ex):
            n = ex.value.numerator
            if 2 <= n <= _EXPAND_POW_LIMIT:
                acc: Expr = base
                for _ in range(n - 1):
                    acc = _mul_expand(acc, base)
                return acc
        return _build_pow(base, ex)
    acc = ONE
    for f in e.factors:
        acc = _mul_expand(acc, _expand(f))
    return acc


def expand(e: Expr) -> Expr:
    """Distribute products over sums and expand small integer powers of sums."""
    return _expand(canonicalize(e))


def _denominator_bases(e: Expr) -> dict[Expr, int]:
    """Bases appearing with negative integer exponents, with the max depth."""
    out: dict[Expr, int] = {}
    for t in add_terms(e):
        for f in mul_factors(t):
            if (isinstance(f, Pow) and _is_int(f.exponent)
                    and f.exponent.value < 0):
                k = -f.exponent.value.numerator
                if out.get(f.base, 0) < k:
                    out[f.base] = k
    return out


def equals(a: Expr, b: Expr) -> bool:
    """True iff a - b expands and canonicalizes to zero.

    Rational structure is handled by clearing denominators; beyond that the
    check is purely syntactic: no trig or log identities, so e.g. sin(2x)
    and 2 sin(x) cos(x) compare unequal by design.
    """
    ca, cb = canonicalize(a), canonicalize(b)
    if ca == cb:
        return True
    diff = _expand(_build_add([ca, _build_mul([NEG_ONE, cb])]))
    if diff == ZERO:
        return True
    dens = _denominator_bases(diff)
    if not dens:
        return False
    # Multiplying by nonzero polynomials preserves the zero test for the
    # formal rational identity.  Attach the base power to each term first so
    # that base^k meets base^-k before any distribution happens.
    cleared = diff
    for base, k in dens.items():
        bp = _build_pow(base, Const(Fraction(k)))
        cleared = _build_add([_build_mul([t, bp]) for t in add_terms(cleared)])
    return _expand(cleared) == ZERO


def _term_map(e: Expr) -> dict[Expr, Fraction]:
    out: dict[Expr, Fraction] = {}
    for t in add_terms(e):
        c, rest = coeff_rest(t)
        out[rest] = out.get(rest, Fraction(0)) + c
    return {r: c for r, c in out.items() if c != 0}


def constant_ratio(a: Expr, b: Expr, var: Optional[str] = None) -> Optional[Fraction]:
    """Rational k with a = k*b, or None.  b must be nonzero.

    The ``var`` argument is accepted for interface symmetry with the rest of
    the engine; the ratio is a plain rational so it is variable-free anyway.
    """
    ea, eb = expand(a), expand(b)
    if eb == ZERO:
        return None
    if ea == ZERO:
        return Fraction(0)
    ta, tb = _term_map(ea), _term_map(eb)
    if set(ta) != set(tb):
        return None
    k: Optional[Fraction] = None
    for rest, cb in tb.items():
        r = ta[rest] / cb
        if k is None:
            k = r
        elif r != k:
            return None
    return k


# ---------------------------------------------------------------------------
# Polynomial structure queries.
# ---------------------------------------------------------------------------

def laurent_coeffs(e: Expr, var: str) -> Optional[dict[int, Fraction]]:
    """Coefficients {degree: c} if e is a Laurent polynomial in var with
    rational coefficients; None otherwise."""
    out: dict[int, Fraction] = {}
    for t in add_terms(expand(e)):
        c, rest = coeff_rest(t)
        deg = 0
        for f in mul_factors(rest):
            if f == ONE:
                continue
            if isinstance(f, Sym) and f.name == var:
                deg += 1
            elif (isinstance(f, Pow) and isinstance(f.base, Sym)
                  and f.base.name == var and _is_int(f.exponent)):
                deg += f.exponent.value.numerator
            else:
                return None
        out[deg] = out.get(deg, Fraction(0)) + c
    return {d: c for d, c in out.items() if c != 0}


def poly_coeffs(e: Expr, var: str) -> Optional[dict[int, Fraction]]:
    """Like laurent_coeffs but requiring nonnegative degrees."""
    cs = laurent_coeffs(e, var)
    if cs is None or any(d < 0 for d in cs):
        return None
    return cs


def poly_expr(coeffs: Mapping[int, Fraction], var: str) -> Expr:
    """Rebuild a canonical expression from {degree: coefficient}."""
    terms = [_scale(_build_pow(Sym(var), const(d)), Fraction(c))
             for d, c in sorted(coeffs.items()) if c != 0]
    return _build_add(terms) if terms else ZERO


def _syntactic_degree(e: Expr, var: str) -> Optional[int]:
    """Degree of e as a polynomial in var, or None if not polynomial."""
    if not contains_symbol(e, var):
        return 0
    if isinstance(e, Sym):
        return 1
    if isinstance(e, Add):
        degs = [_syntactic_degree(t, var) for t in e.terms]
        return None if any(d is None for d in degs) else max(degs)  # type: ignore[arg-type]
    if isinstance(e, Mul):
        total = 0
        for f in e.factors:
            d = _syntactic_degree(f, var)
            if d is None:
                return None
            total += d
        return total
    if isinstance(e, Pow):
        if _is_int(e.exponent) and e.exponent.value >= 0:
            d = _syntactic_degree(e.base, var)
            return None if d is None else d * e.exponent.value.numerator
        return None
    return None


def _max_poly_degree(e: Expr, var: str) -> int:
    d = _syntactic_degree(e, var)
    if d is not None:
        return d
    if isinstance(e, Add):
        return max(_max_poly_degree(t, var) for t in e.terms)
    if isinstance(e, Mul):
        return max(_max_poly_degree(f, var) for f in e.factors)
    if isinstance(e, Pow):
        if _is_int(e.exponent) and e.exponent.value > 0:
            base_deg = _syntactic_degree(e.base, var)
            if base_deg is not None:
                return base_deg * e.exponent.value.numerator
        return _max_poly_degree(e.base, var) if _syntactic_degree(e.base, var) is None else 0
    return 0  # Fun: arguments are not polynomial factors


def node_count(e: Expr) -> int:
    if isinstance(e, (Const, Sym)):
        return 1
    if isinstance(e, Add):
        return 1 + sum(node_count(t) for t in e.terms)
    if isinstance(e, Mul):
        return 1 + sum(node_count(f) for f in e.factors)
    if isinstance(e, Pow):
        return 1 + node_count(e.base) + node_count(e.exponent)
    return 1 + node_count(e.arg)


@dataclass(frozen=True)
class ComplexityScore:
    node_count: int
    max_poly_degree: int
    score: int


def complexity_score(e: Expr, var: str) -> ComplexityScore:
    """Deterministic difficulty proxy: node count plus 4 per polynomial degree."""
    n = node_count(e)
    d = _max_poly_degree(e, var)
    return ComplexityScore(n, d, n + 4 * d)


# ---------------------------------------------------------------------------
# Floating point evaluation.
# ---------------------------------------------------------------------------

class EvalError(ValueError):
    """Raised when an expression cannot be evaluated at the given point."""


def eval_float(e: Expr, env: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value.numerator / e.value.denominator
    if isinstance(e, Sym):
        try:
            return float(env[e.name])
        except KeyError:
            raise EvalError(f"unbound symbol {e.name!r}") from None
    if isinstance(e, Add):
        return math.fsum(eval_float(t, env) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= eval_float(f, env)
        return out
    if isinstance(e, Pow):
        b = eval_float(e.base, env)
        x = eval_float(e.exponent, env)
        if b == 0.0 and x < 0:
            raise EvalError("zero raised to a negative power")
        if b < 0 and x != int(x):
            raise EvalError("negative base with non-integer exponent")
        try:
            r = b ** x
        except OverflowError:
            raise EvalError("overflow in power") from None
        if isinstance(r, complex) or not math.isfinite(r):
            raise EvalError("non-finite power result")
        return r
    if isinstance(e, Fun):
        a = eval_float(e.arg, env)
        if e.name == "ln":
            if a <= 0:
                raise EvalError(f"ln of non-positive value {a}")
            return math.log(a)
        if e.name == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                raise EvalError("overflow in exp") from None
        if e.name == "sin":
            return math.sin(a)
        if e.name == "cos":
            return math.cos(a)
        return math.atan(a)
    raise TypeError(f"not an Expr: {e!r}")
