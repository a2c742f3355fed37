"""The tabular integration-by-parts state machine.

A derivation builds a three-column table one row at a time: alternate the
sign, differentiate the u column, integrate the dv column.  After each row
the residual integral (sign * u_n * v_{n-1} from the bottom row) is
classified, and the derivation either stops (zero row, directly integrable
residual, or a self-similar copy of the original solved algebraically),
keeps stepping, or restarts on a simpler subproblem in a separate table.
Assembly follows the diagonal-product partial sum

    S_n = u_1 v_1 - u_2 v_2 + ... + (-1)^(n-1) u_n v_n

where v_j is row j+1's dv entry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Union

from .expr import (
    Expr, Const, Sym, Add, Mul, Pow, ZERO, ONE,
    add, mul, scale, canonicalize, coeff_rest, contains_symbol, is_free_of,
    mul_factors, laurent_coeffs, poly_expr, complexity_score,
    constant_ratio, equals, substitute, free_symbols, eval_float, EvalError,
    _syntactic_degree,
)
from .calculus import differentiate, antiderivative

# When enabled, every step re-checks the partial-sum identity
# differentiate(S_n) + sign * residual == integrand.
DEBUG_INVARIANTS = False


class EngineError(Exception):
    pass


class SplitMismatch(EngineError):
    pass


class NoRuleForDv(EngineError):
    def __init__(self, dv: Expr):
        super().__init__("dv column left the antiderivative rule table")
        self.dv = dv


class TooShort(EngineError):
    pass


class FinalizeError(EngineError):
    pass


class SelfSimilarSingular(FinalizeError):
    """Residual equals the original exactly (ratio 1): the identity from
    Eq-style assembly degenerates and another split is needed."""


@dataclass(frozen=True)
class IntegralProblem:
    integrand: Expr
    var: str


def problem(integrand: Expr, var: str) -> IntegralProblem:
    return IntegralProblem(canonicalize(integrand), var)


@dataclass(frozen=True)
class Split:
    u: Expr
    dv_integrand: Expr


@dataclass(frozen=True)
class TableRow:
    index: int
    sign: int  # (-1)^(index-1)
    u_entry: Expr
    dv_entry: Expr


@dataclass(frozen=True)
class Table:
    problem: IntegralProblem
    split: Split
    rows: tuple[TableRow, ...]
    pin_schedule: tuple[Expr, ...] = ()


# -- Outcomes ----------------------------------------------------------------

@dataclass(frozen=True)
class ZeroRow:
    tag = "zero_row"


@dataclass(frozen=True)
class Direct:
    residual_antiderivative: Expr
    tag = "direct"


@dataclass(frozen=True)
class SelfSimilar:
    c: Fraction
    tag = "self_similar"


@dataclass(frozen=True)
class Simpler:
    subproblem: IntegralProblem
    sign: int
    tag = "simpler"


@dataclass(frozen=True)
class Harder:
    residual_score: int
    original_score: int
    note: str = ""
    tag = "harder"


@dataclass(frozen=True)
class Unknown:
    note: str = ""
    tag = "unknown"


Outcome = Union[ZeroRow, Direct, SelfSimilar, Simpler, Harder, Unknown]

FINALIZABLE = (ZeroRow, Direct, SelfSimilar)


@dataclass(frozen=True)
class Attempt:
    split: Split
    table: Optional[Table]
    reason: str


@dataclass(frozen=True)
class DerivationTrace:
    table: Table
    outcome: Outcome
    children: tuple["DerivationTrace", ...]
    dv_resolutions: tuple["DerivationTrace", ...]
    final_antiderivative: Expr  # includes the constant symbol
    constant_symbol: str
    abandoned: tuple[Attempt, ...] = ()

    @property
    def body(self) -> Expr:
        """Final antiderivative with the integration constant set to zero."""
        return substitute(self.final_antiderivative, self.constant_symbol, ZERO)

    def all_tables(self):
        """Tables in derivation order: own, dv resolutions, then children."""
        yield self
        for tr in self.dv_resolutions:
            yield from tr.all_tables()
        for tr in self.children:
            yield from tr.all_tables()


@dataclass(frozen=True)
class Policy:
    max_rows: int = 12
    max_recursion: int = 32
    split_attempts: Optional[int] = None  # None means: try every suggestion
    retry: bool = True  # try further splits after a forced split fails


class Exhausted(EngineError):
    def __init__(self, attempts: tuple[Attempt, ...], message: str = "no split led to an antiderivative"):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class VerificationReport:
    symbolic: bool
    numeric_max_rel_error: Optional[float]
    passed: bool
    detail: str = ""


def fresh_constant(e: Expr) -> str:
    """Constant-of-integration symbol not colliding with the integrand."""
    used = free_symbols(e)
    if "C" not in used:
        return "C"
    i = 0
    while f"C{i}" in used:
        i += 1
    return f"C{i}"


# -- Split suggestion (LIPET) -------------------------------------------------

_FUN_PRIORITY = ("ln", "atan", "exp", "sin", "cos")


def _fun_names(e: Expr) -> frozenset[str]:
    if isinstance(e, (Const, Sym)):
        return frozenset()
    if isinstance(e, Add):
        return frozenset().union(*(_fun_names(t) for t in e.terms))
    if isinstance(e, Mul):
        return frozenset().union(*(_fun_names(f) for f in e.factors))
    if isinstance(e, Pow):
        return _fun_names(e.base) | _fun_names(e.exponent)
    return frozenset((e.name,)) | _fun_names(e.arg)


def lipet_class(f: Expr, var: str) -> int:
    """LIPET priority of a factor as the u choice: lower ranks first.

    0 log, 1 inverse trig, 2 polynomial, 3 other powers (x^q, (ax+b)^q with
    q not a nonnegative integer), 4 exponential, 5 trigonometric.
    """
    names = _fun_names(f)
    if "ln" in names:
        return 0
    if "atan" in names:
        return 1
    if _syntactic_degree(f, var) is not None:
        return 2
    if "exp" in names:
        return 4
    if "sin" in names or "cos" in names:
        return 5
    return 3


def suggest_splits(p: IntegralProblem) -> list[Split]:
    """Candidate (u, dv) factorizations ranked by the LIPET class of u.

    Constant factors ride with dv.  A single non-product integrand gets the
    (u = f, dv = 1) split.  Within a class, splits whose dv is directly
    integrable by the rule table rank first.
    """
    factors = mul_factors(p.integrand)
    dep = [f for f in factors if contains_symbol(f, p.var)]
    free = [f for f in factors if is_free_of(f, p.var)]
    if not dep:
        return []
    ranked = []
    if len(dep) == 1:
        dv = mul(*free) if free else ONE
        ranked.append((lipet_class(dep[0], p.var), 0, 0, Split(dep[0], dv)))
    else:
        for i, f in enumerate(dep):
            rest = [g for j, g in enumerate(dep) if j != i] + free
            dv = mul(*rest)
            needs_engine = 0 if antiderivative(dv, p.var) is not None else 1
            ranked.append((lipet_class(f, p.var), needs_engine, i, Split(f, dv)))
    ranked.sort(key=lambda t: t[:3])
    return [s for _, _, _, s in ranked]


# -- Table mechanics ----------------------------------------------------------

def new_table(p: IntegralProblem, s: Split) -> Table:
    """Start a table: first row is (+, u, v0) and must multiply back to the
    integrand."""
    u = canonicalize(s.u)
    dv = canonicalize(s.dv_integrand)
    if not equals(mul(u, dv), p.integrand):
        raise SplitMismatch(
            f"u * dv does not reproduce the integrand")
    return Table(p, Split(u, dv), (TableRow(1, 1, u, dv),))


DvResolver = Callable[[Expr], Optional[Expr]]


def step(t: Table, dv_resolver: Optional[DvResolver] = None) -> Table:
    """Append one row: differentiate u, integrate dv (pinned if scheduled).

    The input table is unchanged.  Raises NoRuleForDv when the dv column
    leaves the rule table and no resolver is supplied.
    """
    last = t.rows[-1]
    var = t.problem.var
    new_u = differentiate(last.u_entry, var)
    hit = antiderivative(last.dv_entry, var)
    if hit is not None:
        new_dv = hit.antiderivative
    elif dv_resolver is not None:
        resolved = dv_resolver(last.dv_entry)
        if resolved is None:
            raise NoRuleForDv(last.dv_entry)
        new_dv = resolved
    else:
        raise NoRuleForDv(last.dv_entry)
    k = len(t.rows) - 1
    if k < len(t.pin_schedule):
        new_dv = add(new_dv, t.pin_schedule[k])
    row = TableRow(last.index + 1, -last.sign, new_u, new_dv)
    out = replace(t, rows=t.rows + (row,))
    if DEBUG_INVARIANTS:
        _check_step_invariant(out)
    return out


def _check_step_invariant(t: Table):
    sign, integrand = residual(t)
    lhs = add(differentiate(partial_sum(t), t.problem.var), scale(integrand, sign))
    if not equals(lhs, t.problem.integrand):
        raise AssertionError("partial-sum identity violated after step")


def combine_polynomial_factors(e: Expr, var: str) -> Expr:
    """Multiply out the rational-coefficient Laurent factors of a product
    when their exact product is a polynomial.

    Keeps residuals in the shape the derivation needs: (2/x)ln(x) times
    (x^3 - x^2/2) becomes (2x^2 - x)ln(x)."""
    factors = mul_factors(e)
    laurents: list[dict[int, Fraction]] = []
    others: list[Expr] = []
    nontrivial = 0
    for f in factors:
        lc = laurent_coeffs(f, var)
        if lc is None:
            others.append(f)
            continue
        laurents.append(lc)
        if not isinstance(f, Const):
            nontrivial += 1
    if nontrivial < 2:
        return e
    prod: dict[int, Fraction] = {0: Fraction(1)}
    for lc in laurents:
        nxt: dict[int, Fraction] = {}
        for d1, c1 in prod.items():
            for d2, c2 in lc.items():
                nxt[d1 + d2] = nxt.get(d1 + d2, Fraction(0)) + c1 * c2
        prod = nxt
    if any(d < 0 and c != 0 for d, c in prod.items()):
        return e
    poly = poly_expr(prod, var)
    return mul(poly, *others) if others else poly


def residual(t: Table) -> tuple[int, Expr]:
    """Bottom-row residual: (sign, canonical u_n * v_{n-1})."""
    if len(t.rows) < 2:
        raise TooShort("residual needs at least two rows")
    last = t.rows[-1]
    integrand = mul(last.u_entry, last.dv_entry)
    integrand = combine_polynomial_factors(integrand, t.problem.var)
    return last.sign, integrand


def partial_sum(t: Table) -> Expr:
    """Diagonal products: sum of sign_j * u_j * v_j with v_j one row down."""
    terms = []
    for j in range(len(t.rows) - 1):
        r, nxt = t.rows[j], t.rows[j + 1]
        terms.append(scale(mul(r.u_entry, nxt.dv_entry), r.sign))
    return add(*terms) if terms else ZERO


def strip_coefficient(e: Expr) -> Expr:
    """Drop a leading rational coefficient; difficulty is scale-invariant."""
    _, rest = coeff_rest(e)
    return rest


def classify(t: Table) -> Outcome:
    """Decide how to proceed from the bottom row, in fixed order:
    zero row, directly integrable, self-similar, harder, simpler."""
    if len(t.rows) < 2:
        raise TooShort("classification needs at least two rows")
    var = t.problem.var
    if t.rows[-1].u_entry == ZERO:
        return ZeroRow()
    sign, integrand = residual(t)
    signed = scale(integrand, sign)
    hit = antiderivative(signed, var)
    if hit is not None:
        return Direct(hit.antiderivative)
    c = constant_ratio(signed, t.problem.integrand, var)
    res_score = complexity_score(integrand, var).score
    orig_score = complexity_score(t.problem.integrand, var).score
    if c is not None:
        if c == 1:
            return Harder(res_score, orig_score,
                          "residual is an exact copy of the original; the algebraic solve degenerates")
        return SelfSimilar(c)
    # Difficulty comparison: polynomial degree dominates (the worked bad
    # split raises it), node count breaks ties; scalar coefficients are
    # ignored since a constant multiple is exactly as hard to integrate.
    rs = complexity_score(strip_coefficient(integrand), var)
    os_ = complexity_score(strip_coefficient(t.problem.integrand), var)
    if (rs.max_poly_degree, rs.node_count) > (os_.max_poly_degree, os_.node_count):
        return Harder(res_score, orig_score)
    return Simpler(IntegralProblem(integrand, var), sign)


def finalize(t: Table, o: Outcome, constant_symbol: Optional[str] = None,
             dv_resolutions: tuple[DerivationTrace, ...] = ()) -> DerivationTrace:
    """Assemble the antiderivative from the partial sum and the outcome."""
    if isinstance(o, SelfSimilar) and o.c == 1:
        raise SelfSimilarSingular("self-similar ratio 1; choose another split")
    if not isinstance(o, FINALIZABLE):
        raise FinalizeError(f"outcome {getattr(o, 'tag', o)!r} cannot be finalized")
    if len(t.rows) < 2:
        raise TooShort("cannot finalize a one-row table")
    s = partial_sum(t)
    if isinstance(o, ZeroRow):
        body = s
    elif isinstance(o, Direct):
        body = add(s, o.residual_antiderivative)
    else:
        body = scale(s, 1 / (1 - o.c))
    cname = constant_symbol or fresh_constant(t.problem.integrand)
    final = add(body, Sym(cname))
    return DerivationTrace(t, o, (), dv_resolutions, final, cname)


# -- Automatic derivation -----------------------------------------------------

def _should_keep_stepping(t: Table, o: Simpler) -> bool:
    """Stay in this table when stepping is what a fresh restart would do.

    Step on when the u column is about to hit zero, or when the best fresh
    split of the residual picks a u proportional to the current one (then
    continuing the derivative/antiderivative chain is the same move).
    Otherwise restarting with the better split is worthwhile: the
    separate-table pattern.
    """
    var = t.problem.var
    last_u = t.rows[-1].u_entry
    if differentiate(last_u, var) == ZERO:
        return True
    fresh = suggest_splits(o.subproblem)
    if not fresh:
        return True
    return constant_ratio(fresh[0].u, last_u, var) is not None


def _auto(p: IntegralProblem, policy: Policy, budget: list[int],
          forced: Optional[Split] = None) -> DerivationTrace:
    if budget[0] <= 0:
        raise Exhausted((), "recursion budget exhausted")
    budget[0] -= 1
    hit = antiderivative(p.integrand, p.var)
    if hit is not None:
        # Rule-table short-circuit: the trivial one-row table records it.
        t = Table(p, Split(ONE, p.integrand), (TableRow(1, 1, ONE, p.integrand),))
        cname = fresh_constant(p.integrand)
        final = add(hit.antiderivative, Sym(cname))
        return DerivationTrace(t, Direct(hit.antiderivative), (), (), final, cname)
    if isinstance(p.integrand, Add):
        # Linearity: derive each term separately and sum the results.
        children: Optional[list[DerivationTrace]] = []
        for term in p.integrand.terms:
            try:
                children.append(_auto(IntegralProblem(term, p.var), policy, budget))
            except Exhausted:
                children = None
                break
        if children is not None:
            body = add(*[c.body for c in children])
            t = Table(p, Split(ONE, p.integrand), (TableRow(1, 1, ONE, p.integrand),))
            cname = fresh_constant(p.integrand)
            return DerivationTrace(t, Direct(body), tuple(children), (),
                                   add(body, Sym(cname)), cname)
    attempts: list[Attempt] = []
    splits = suggest_splits(p)
    if forced is not None:
        splits = [forced] + ([s for s in splits if s != forced] if policy.retry else [])
    if policy.split_attempts is not None:
        splits = splits[:policy.split_attempts]
    for s in splits:
        trace = _run_split(p, s, policy, budget, attempts)
        if trace is not None:
            if attempts:
                trace = replace(trace, abandoned=tuple(attempts))
            return trace
    raise Exhausted(tuple(attempts))


def _run_split(p: IntegralProblem, s: Split, policy: Policy, budget: list[int],
               attempts: list[Attempt]) -> Optional[DerivationTrace]:
    dv_traces: list[DerivationTrace] = []

    def resolver(e: Expr) -> Optional[Expr]:
        try:
            tr = _auto(IntegralProblem(e, p.var), policy, budget)
        except Exhausted:
            return None
        dv_traces.append(tr)
        return tr.body

    try:
        t = new_table(p, s)
    except SplitMismatch as exc:
        attempts.append(Attempt(s, None, str(exc)))
        return None
    classifications = 0
    while len(t.rows) < policy.max_rows:
        try:
            t = step(t, dv_resolver=resolver)
        except NoRuleForDv:
            attempts.append(Attempt(s, t, "dv column left the rule table"))
            return None
        o = classify(t)
        classifications += 1
        if isinstance(o, FINALIZABLE):
            try:
                return finalize(t, o, dv_resolutions=tuple(dv_traces))
            except SelfSimilarSingular as exc:
                attempts.append(Attempt(s, t, str(exc)))
                return None
        if isinstance(o, Harder):
            if classifications == 1:
                attempts.append(Attempt(
                    s, t,
                    f"residual is harder than the original "
                    f"(score {o.residual_score} > {o.original_score})"))
                return None
            continue  # later rows may still resolve (the add-and-divide cases)
        assert isinstance(o, Simpler)
        if _should_keep_stepping(t, o):
            continue
        try:
            child = _auto(o.subproblem, policy, budget)
        except Exhausted:
            attempts.append(Attempt(s, t, "residual subproblem exhausted the engine"))
            return None
        cname = fresh_constant(p.integrand)
        final = add(partial_sum(t), scale(child.body, o.sign), Sym(cname))
        return DerivationTrace(t, o, (child,), tuple(dv_traces), final, cname)
    attempts.append(Attempt(s, t, "row limit reached"))
    return None


def auto_integrate(p: IntegralProblem, policy: Policy = Policy(),
                   forced_split: Optional[Split] = None) -> DerivationTrace:
    """Derive a verified antiderivative automatically.

    Tries suggested splits in LIPET order (or a forced split first), steps
    each table until a stopping outcome, recurses on residuals that call for
    a separate table, and abandons splits whose first residual is harder
    than the original.  Raises Exhausted (carrying every attempted table)
    when nothing works within the policy limits.
    """
    budget = [policy.max_recursion]
    return _auto(problem(p.integrand, p.var), policy, budget, forced=forced_split)


# -- Verification --------------------------------------------------------------

_SAMPLE_RANGES = ((0.1, 3.0), (1.1, 4.0), (3.2, 6.2))
_SAMPLE_COUNT = 20


def sample_points(lo: float, hi: float, n: int = _SAMPLE_COUNT) -> list[float]:
    return [lo + (hi - lo) * (i + 0.5) / n for i in range(n)]


def _aux_env(names, var: str) -> dict[str, float]:
    env = {}
    for i, name in enumerate(sorted(n for n in names if n != var)):
        env[name] = 0.7 + 0.31 * i
    return env


def numeric_max_rel_error(a: Expr, b: Expr, var: str) -> Optional[float]:
    """Max relative difference over sample points, or None if no sample
    range avoids the domain restrictions of both expressions."""
    names = free_symbols(a) | free_symbols(b)
    env = _aux_env(names, var)
    for lo, hi in _SAMPLE_RANGES:
        worst = 0.0
        try:
            for xv in sample_points(lo, hi):
                env[var] = xv
                va = eval_float(a, env)
                vb = eval_float(b, env)
                rel = abs(va - vb) / max(1.0, abs(va), abs(vb))
                worst = max(worst, rel)
        except EvalError:
            continue
        return worst
    return None


def verify(trace: DerivationTrace) -> VerificationReport:
    """Differentiate the final antiderivative back against the integrand.

    Passes on symbolic equality, or numerically (max relative error below
    1e-9 over 20 sample points) when the canonical comparison cannot close.
    """
    var = trace.table.problem.var
    integrand = trace.table.problem.integrand
    deriv = differentiate(trace.final_antiderivative, var)
    symbolic = equals(deriv, integrand)
    if symbolic:
        return VerificationReport(True, None, True)
    err = numeric_max_rel_error(deriv, integrand, var)
    if err is None:
        return VerificationReport(False, None, False,
                                  "no sample range avoids domain errors")
    return VerificationReport(False, err, err < 1e-9,
                              "" if err < 1e-9 else f"max relative error {err:.3e}")
