"""Applications driven by the table engine: definite integrals, Taylor's
formula with integral remainder, the asymptotic expansion of the exponential
integral, and the exercise corpus with its quadrature cross-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .expr import (
    Expr, Const, Sym, ZERO, ONE, NEG_ONE,
    add, mul, power, scale, subtract, exp, ln, sin,
    canonicalize, substitute, equals, eval_float, EvalError, contains_symbol,
)
from .calculus import differentiate, antiderivative
from .engine import (
    IntegralProblem, Split, Table, Policy,
    new_table, step, residual, partial_sum, auto_integrate, verify, problem,
)
from .quadrature import quad


# ---------------------------------------------------------------------------
# Taylor's formula with integral remainder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorResult:
    center: Fraction
    order: int
    polynomial: Expr          # in out_var
    remainder_integrand: Expr  # in var and out_var, signed
    table: Optional[Table]
    boundary_at_x: tuple[Expr, ...]  # per-term boundary values at t = x


def taylor(f: Expr, a, n: int, var: str = "t", out_var: str = "x") -> TaylorResult:
    """Derive the order-n Taylor polynomial of f about a with the pinned
    table: u = -f'(t), dv = -1, first antiderivative pinned to (x - t) and
    the j-th to (-1)^(j+1) (x-t)^j / j!."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    a = Fraction(a)
    f = canonicalize(f)
    if contains_symbol(f, out_var):
        raise ValueError(f"f must not contain the output variable {out_var!r}")
    x = Sym(out_var)
    fp = differentiate(f, var)
    f_at_a = substitute(f, var, Const(a))
    if n == 0:
        return TaylorResult(a, 0, f_at_a, fp, None, ())
    targets = [NEG_ONE]
    shift = subtract(x, Sym(var))
    for k in range(1, n + 1):
        targets.append(scale(power(shift, k),
                             Fraction((-1) ** (k + 1), math.factorial(k))))
    pins = []
    for k in range(1, n + 1):
        hit = antiderivative(targets[k - 1], var)
        assert hit is not None
        pin = subtract(targets[k], hit.antiderivative)
        if contains_symbol(pin, var):
            raise AssertionError("pin is not a constant of integration")
        pins.append(pin)
    p = IntegralProblem(fp, var)
    t = new_table(p, Split(mul(NEG_ONE, fp), NEG_ONE))
    t = Table(t.problem, t.split, t.rows, tuple(pins))
    for _ in range(n):
        t = step(t)
    for k, row in enumerate(t.rows[1:], start=1):
        if not equals(row.dv_entry, targets[k]):
            raise AssertionError(f"pinned dv cell {k} drifted from its target")
    s = partial_sum(t)
    boundary = tuple(
        substitute(scale(mul(t.rows[j].u_entry, t.rows[j + 1].dv_entry),
                         t.rows[j].sign), var, x)
        for j in range(len(t.rows) - 1))
    s_at_x = substitute(s, var, x)
    s_at_a = substitute(s, var, Const(a))
    poly = canonicalize(add(f_at_a, subtract(s_at_x, s_at_a)))
    sign, res = residual(t)
    remainder = scale(res, sign)
    return TaylorResult(a, n, poly, remainder, t, boundary)


def taylor_check(f: Expr, a, n: int, x_sample: float, var: str = "t",
                 out_var: str = "x", tol: float = 1e-10) -> float:
    """|f(x) - polynomial(x) - integral of the remainder| at one sample."""
    res = taylor(f, a, n, var, out_var)
    fx = eval_float(f, {var: x_sample})
    px = eval_float(res.polynomial, {out_var: x_sample})
    q = quad(res.remainder_integrand, var, float(Fraction(a)), x_sample,
             tol=tol, env={out_var: x_sample})
    return abs(fx - px - q.value)


# ---------------------------------------------------------------------------
# Definite integrals via the engine
# ---------------------------------------------------------------------------

def definite(p: IntegralProblem, a: Expr, b: Expr, policy: Policy = Policy()) -> Expr:
    """Evaluate the integral from a to b using an engine-derived
    antiderivative with the constant set to zero."""
    tr = auto_integrate(p, policy)
    body = tr.body
    return canonicalize(subtract(substitute(body, p.var, b),
                                 substitute(body, p.var, a)))


# ---------------------------------------------------------------------------
# The asymptotic expansion of f(x) = integral_x^inf e^(x-t)/t dt
# ---------------------------------------------------------------------------

def _asymptotic_integrand() -> Expr:
    t, x = Sym("t"), Sym("x")
    return mul(power(t, -1), exp(subtract(x, t)))


def asymptotic_table(n: int) -> Table:
    """n-step table for u = 1/t, dv = e^(x-t) dt (integration in t)."""
    if n < 1:
        raise ValueError("need at least one row step")
    t, x = Sym("t"), Sym("x")
    p = IntegralProblem(_asymptotic_integrand(), "t")
    table = new_table(p, Split(power(t, -1), exp(subtract(x, t))))
    for _ in range(n):
        table = step(table)
    return table


def asymptotic_partial_sum(n: int) -> Expr:
    """The engine-produced partial sum evaluated across the bounds
    [t = x, t -> inf): every diagonal term carries e^(x-t), so the upper
    boundary vanishes and the value is -S_n at t = x (an expression in x)."""
    table = asymptotic_table(n)
    s = partial_sum(table)
    for term in (s.terms if hasattr(s, "terms") else (s,)):
        if not contains_symbol(term, "t"):
            raise AssertionError("partial-sum term without decay factor")
    return canonicalize(scale(substitute(s, "t", Sym("x")), -1))


def asymptotic_remainder_value(x_value, n: int, tol: float = 1e-12) -> float:
    """Signed remainder (-1)^n n! * integral_x^inf t^(-n-1) e^(x-t) dt,
    with the coefficient coming from the table's bottom row."""
    xf = float(Fraction(x_value))
    table = asymptotic_table(n)
    sign, res = residual(table)
    q = quad(res, "t", xf, math.inf, tol=tol, env={"x": xf})
    return sign * q.value


def asymptotic_identity_check(x_value, n: int, tol: float = 1e-12) -> float:
    """|f(x) - partial sum - remainder| with every coefficient produced by
    the engine's table."""
    xf = float(Fraction(x_value))
    f_val = quad(_asymptotic_integrand(), "t", xf, math.inf, tol=tol,
                 env={"x": xf}).value
    partial = eval_float(asymptotic_partial_sum(n), {"x": xf})
    remainder = asymptotic_remainder_value(x_value, n, tol=tol)
    return abs(f_val - partial - remainder)


# ---------------------------------------------------------------------------
# Eq-style closed form for powers of ln
# ---------------------------------------------------------------------------

def log_power_closed_form(n: int, var: str = "x") -> Expr:
    """x * sum_{k=0..n} (-1)^(n-k) (n!/k!) ln^k x  (no constant)."""
    x = Sym(var)
    terms = [scale(mul(x, power(ln(x), k)),
                   Fraction((-1) ** (n - k) * math.factorial(n), math.factorial(k)))
             for k in range(n + 1)]
    return add(*terms)


# ---------------------------------------------------------------------------
# Exercise corpus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusItem:
    id: str
    passed: bool
    max_error: Optional[float]
    detail: str = ""


@dataclass(frozen=True)
class CorpusReport:
    items: tuple[CorpusItem, ...]

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def to_text(self) -> str:
        lines = []
        for i in self.items:
            status = "PASS" if i.passed else "FAIL"
            err = "" if i.max_error is None else f" max_err={i.max_error:.3e}"
            detail = f" ({i.detail})" if i.detail and not i.passed else ""
            lines.append(f"{status} {i.id}{err}{detail}")
        return "\n".join(lines)

    def to_json(self) -> list[dict]:
        return [{"id": i.id, "status": "pass" if i.passed else "fail",
                 "max_error": i.max_error, "detail": i.detail}
                for i in self.items]


def _verify_item(item_id: str, integrand: str, var: str = "x") -> CorpusItem:
    from .parsing import parse
    try:
        tr = auto_integrate(problem(parse(integrand), var))
    except Exception as exc:  # Exhausted or engine failure: report, not crash
        return CorpusItem(item_id, False, None, f"derivation failed: {exc}")
    rep = verify(tr)
    return CorpusItem(item_id, rep.passed, rep.numeric_max_rel_error, rep.detail)


def _exercise4_item(n: int, b: int) -> CorpusItem:
    item_id = f"exercise4_n{n}_b{b}"
    from .parsing import parse
    s = Sym("s")
    integrand = mul(power(subtract(ONE, s), n), power(s, b - 1))
    try:
        val = definite(IntegralProblem(canonicalize(integrand), "s"), ZERO, ONE)
    except Exception as exc:
        return CorpusItem(item_id, False, None, f"derivation failed: {exc}")
    expected = Fraction(math.factorial(n))
    for k in range(n + 1):
        expected /= (b + k)
    # identity: n^b * integral == n! n^b / (b (b+1) ... (b+n))
    scaled_val = scale(val, Fraction(n) ** b)
    scaled_expected = Const(expected * Fraction(n) ** b)
    if equals(scaled_val, scaled_expected):
        return CorpusItem(item_id, True, 0.0)
    try:
        err = abs(eval_float(scaled_val, {}) - float(scaled_expected.value))
    except EvalError:
        return CorpusItem(item_id, False, None, "could not evaluate")
    return CorpusItem(item_id, err < 1e-9, err)


def run_corpus() -> CorpusReport:
    """Exercises 1-4: engine derivations verified by differentiation, plus
    the Beta-style definite identity checked exactly."""
    items: list[CorpusItem] = []
    for n in range(1, 5):
        for a in (1, 2, 3):
            items.append(_verify_item(f"exercise1_n{n}_a{a}", f"x^{n}*sin({a}*x)"))
    items.append(_verify_item("exercise2", "x^2*exp(x)*sin(x)"))
    items.append(_verify_item("exercise3", "ln(x^2 + 4*x + 7)"))
    for n in (1, 2, 3):
        for b in (1, 2, 3):
            items.append(_exercise4_item(n, b))
    items.sort(key=lambda i: i.id)
    return CorpusReport(tuple(items))


# ---------------------------------------------------------------------------
# Registry of the built-in worked examples (drives the CLI examples command)
# ---------------------------------------------------------------------------

def _golden_item(item_id: str, integrand: str, expected: str,
                 var: str = "x") -> CorpusItem:
    from .parsing import parse
    try:
        tr = auto_integrate(problem(parse(integrand), var))
    except Exception as exc:
        return CorpusItem(item_id, False, None, f"derivation failed: {exc}")
    want = parse(expected)
    if not equals(tr.body, want):
        return CorpusItem(item_id, False, None,
                          "antiderivative differs from the published result")
    rep = verify(tr)
    return CorpusItem(item_id, rep.passed, rep.numeric_max_rel_error, rep.detail)


def worked_examples_report() -> CorpusReport:
    """Every worked result: the five examples, the log-power closed form,
    Taylor spot checks, the asymptotic identity grid, and the exercises."""
    items: list[CorpusItem] = []
    items.append(_golden_item("example1_ln", "ln(x)", "x*ln(x) - x"))
    items.append(_golden_item("example2_exp_sin", "exp(3*x)*sin(2*x)",
                              "exp(3*x)/13*(3*sin(2*x) - 2*cos(2*x))"))
    items.append(_golden_item("example3_retry", "(x^2 - 3*x)*sin(x)",
                              "(3*x - x^2)*cos(x) + (2*x - 3)*sin(x) + 2*cos(x)"))
    items.append(_golden_item("example4_sin_cos", "sin(2*x)*cos(5*x)",
                              "5/21*sin(2*x)*sin(5*x) + 2/21*cos(2*x)*cos(5*x)"))
    items.append(_golden_item(
        "example5_two_tables", "(3*x^2 - x)*ln(x)^2",
        "(x^3 - x^2/2)*ln(x)^2 + (x^2/2 - 2*x^3/3)*ln(x) + 2*x^3/9 - x^2/4"))
    for n in range(1, 7):
        item_id = f"log_power_n{n}"
        try:
            tr = auto_integrate(problem(power(ln(Sym("x")), n), "x"))
            ok = equals(tr.body, log_power_closed_form(n))
            items.append(CorpusItem(item_id, ok, None,
                                    "" if ok else "closed form mismatch"))
        except Exception as exc:
            items.append(CorpusItem(item_id, False, None, str(exc)))
    t = Sym("t")
    for name, f in (("sin", sin(t)), ("exp", exp(t))):
        for n in (2, 4):
            item_id = f"taylor_{name}_n{n}"
            try:
                err = taylor_check(f, 0, n, 1.3)
                items.append(CorpusItem(item_id, err < 1e-8, err))
            except Exception as exc:
                items.append(CorpusItem(item_id, False, None, str(exc)))
    for xv in (10, 50):
        for n in (1, 3):
            item_id = f"asymptotic_x{xv}_n{n}"
            try:
                err = asymptotic_identity_check(xv, n)
                items.append(CorpusItem(item_id, err < 1e-8, err))
            except Exception as exc:
                items.append(CorpusItem(item_id, False, None, str(exc)))
    items.extend(run_corpus().items)
    items.sort(key=lambda i: i.id)
    return CorpusReport(tuple(items))
