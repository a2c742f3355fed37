"""Acceptance gate: every top-level criterion at its stated tolerance.

Each test prints one PASS line when it holds (run with -s to see them); a
failure reads as the criterion's FAIL line via the assertion message.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from tabular_ibp.calculus import differentiate
from tabular_ibp.engine import (
    Exhausted, Harder, IntegralProblem, Policy, Split, classify, new_table,
    partial_sum, problem, residual, step, suggest_splits, auto_integrate, verify,
)
from tabular_ibp.expr import (
    ZERO, Sym, add, complexity_score, const, cos, equals, eval_float, exp, ln,
    mul, power, scale, sin, sym, EvalError, canonicalize,
)
from tabular_ibp.parsing import parse
from tabular_ibp.quadrature import quad
from tabular_ibp.showcase import (
    asymptotic_identity_check, asymptotic_partial_sum, log_power_closed_form,
    run_corpus, taylor, taylor_check,
)
from conftest import rand_expr, rand_poly, rand_rational, rand_trig_exp

x = sym("x")
t = sym("t")


def _golden(integrand_text, expected_text, var="x"):
    t0 = time.perf_counter()
    tr = auto_integrate(problem(parse(integrand_text), var))
    elapsed = time.perf_counter() - t0
    want = add(parse(expected_text), Sym(tr.constant_symbol))
    assert equals(tr.final_antiderivative, want), integrand_text
    assert elapsed < 1.0, f"{integrand_text} took {elapsed:.2f}s"
    return tr


def test_golden_reproduction_of_worked_results():
    _golden("ln(x)", "x*ln(x) - x")
    _golden("exp(3*x)*sin(2*x)", "exp(3*x)/13*(3*sin(2*x) - 2*cos(2*x))")
    _golden("(x^2 - 3*x)*sin(x)",
            "(3*x - x^2)*cos(x) + (2*x - 3)*sin(x) + 2*cos(x)")
    _golden("sin(2*x)*cos(5*x)",
            "5/21*sin(2*x)*sin(5*x) + 2/21*cos(2*x)*cos(5*x)")
    tr5 = _golden("(3*x^2 - x)*ln(x)^2",
                  "(x^3 - x^2/2)*ln(x)^2 + (x^2/2 - 2*x^3/3)*ln(x) + 2*x^3/9 - x^2/4")

    def recursion_count(trace):
        return len(trace.children) + sum(recursion_count(c) for c in trace.children)

    assert recursion_count(tr5) == 1, "fifth worked example must use exactly one recursive table"
    for n in range(1, 7):
        t0 = time.perf_counter()
        tr = auto_integrate(problem(power(ln(x), n), "x"))
        assert equals(tr.body, log_power_closed_form(n)), f"log power n={n}"
        assert time.perf_counter() - t0 < 1.0
    print("PASS golden reproduction (5 worked results + log powers n=1..6, exact, <1s each)")


def test_partial_sum_identity_500_random_tables():
    rng = random.Random(1801)
    checked = 0
    for _ in range(500):
        poly = rand_poly(rng, "x", max_deg=4)
        trig = rand_trig_exp(rng, "x")
        integrand = mul(poly, trig)
        p = IntegralProblem(integrand, "x")
        split = Split(poly, trig) if rng.random() < 0.5 else Split(trig, poly)
        table = new_table(p, split)
        depth = rng.randint(1, 6)
        for _ in range(depth):
            table = step(table)
            sign, res = residual(table)
            lhs = add(differentiate(partial_sum(table), "x"), scale(res, sign))
            assert equals(lhs, integrand), (poly, trig, depth)
            checked += 1
    assert checked >= 500
    print(f"PASS partial-sum identity on 500 random tables ({checked} stepped checks, 100%)")


def _random_integrable(rng):
    kind = rng.choice(["poly_trig", "poly_exp", "log_power", "poly_log",
                       "trig_pair", "poly_over_linear", "plain_rule"])
    if kind == "poly_trig":
        return mul(rand_poly(rng, "x", 3), rand_trig_exp(rng, "x"))
    if kind == "poly_exp":
        a = rand_rational(rng, nonzero=True)
        return mul(rand_poly(rng, "x", 3), exp(scale(x, a)))
    if kind == "log_power":
        return power(ln(x), rng.randint(1, 3))
    if kind == "poly_log":
        return mul(rand_poly(rng, "x", 3), ln(x))
    if kind == "trig_pair":
        while True:
            a = rng.randint(1, 5)
            b = rng.randint(1, 5)
            if a != b:
                break
        f = sin(scale(x, a)) if rng.random() < 0.5 else cos(scale(x, a))
        g = cos(scale(x, b)) if rng.random() < 0.5 else sin(scale(x, b))
        return mul(f, g)
    if kind == "poly_over_linear":
        a = rand_rational(rng, 1, 4, nonzero=True)
        b = rand_rational(rng, 1, 4, nonzero=True)
        q = rng.randint(2, 4)
        return mul(rand_poly(rng, "x", 2),
                   power(add(scale(x, a), const(b)), const(-q)))
    return rand_trig_exp(rng, "x")


def test_verification_of_golden_set_and_200_random_successes():
    golden = ["ln(x)", "exp(3*x)*sin(2*x)", "(x^2 - 3*x)*sin(x)",
              "sin(2*x)*cos(5*x)", "(3*x^2 - x)*ln(x)^2", "ln(x)^4"]
    for text in golden:
        tr = auto_integrate(problem(parse(text), "x"))
        rep = verify(tr)
        assert rep.passed, text
    rng = random.Random(42)
    successes = 0
    attempts = 0
    while successes < 200 and attempts < 600:
        attempts += 1
        integrand = canonicalize(_random_integrable(rng))
        if integrand == ZERO:
            continue
        try:
            tr = auto_integrate(problem(integrand, "x"))
        except Exhausted:
            continue
        rep = verify(tr)
        assert rep.passed, integrand
        assert rep.symbolic or rep.numeric_max_rel_error < 1e-9
        successes += 1
    assert successes == 200
    print(f"PASS verification of golden set and {successes} random derivations")


def test_taylor_criterion():
    t0 = time.perf_counter()
    for n in (2, 4, 6):
        for xs in (0.5, 1.3, 2.0):
            err = taylor_check(sin(t), 0, n, xs)
            assert err < 1e-8, (n, xs, err)
    for n in (2, 4, 6):
        res = taylor(sin(t), 0, n)
        assert all(b == ZERO for b in res.boundary_at_x), n
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"taylor suite took {elapsed:.2f}s"
    print(f"PASS taylor remainder identity (9 checks < 1e-8, boundaries exactly 0, {elapsed:.2f}s)")


def test_asymptotic_criterion():
    for xv in (10, 20, 50):
        for n in (1, 2, 3, 4):
            err = asymptotic_identity_check(xv, n)
            assert err < 1e-8, (xv, n, err)
    # partial-sum coefficients must come from the engine's table
    got = asymptotic_partial_sum(4)
    want = add(*[scale(power(x, -k), Fraction((-1) ** (k - 1) * math.factorial(k - 1)))
                 for k in (1, 2, 3, 4)])
    assert equals(got, want)
    f50 = quad(parse("t^(-1)*exp(x - t)"), "t", 50.0, math.inf,
               env={"x": 50.0}).value
    assert abs(f50 - 1 / 50 + 1 / 2500) < 2 * 2 / 50**3
    print("PASS asymptotic identity grid (12 checks < 1e-8) and truncation bound at x=50")


def test_exercise_corpus_criterion():
    report = run_corpus()
    assert report.passed, report.to_text()
    ids = [i.id for i in report.items]
    assert sum(1 for i in ids if i.startswith("exercise1")) == 12
    assert "exercise2" in ids and "exercise3" in ids
    assert sum(1 for i in ids if i.startswith("exercise4")) == 9
    for item in report.items:
        if item.id.startswith("exercise4"):
            assert item.max_error is not None and item.max_error < 1e-9
    print(f"PASS exercise corpus ({len(ids)} items)")


def test_bad_split_pedagogy_criterion():
    p = problem(parse("(x^2 - 3*x)*sin(x)"), "x")
    table = step(new_table(p, Split(sin(x), parse("x^2 - 3*x"))))
    outcome = classify(table)
    assert isinstance(outcome, Harder)
    sign, res = residual(table)
    assert complexity_score(res, "x").score > complexity_score(p.integrand, "x").score
    assert outcome.residual_score > outcome.original_score
    print("PASS bad-split pedagogy (forced split flags Harder at first classification, "
          f"score {outcome.residual_score} > {outcome.original_score})")


def test_termination_criterion_1000_random_integrands():
    rng = random.Random(7331)
    policy = Policy()
    outcomes = {"ok": 0, "exhausted": 0}
    t0 = time.perf_counter()
    for i in range(1000):
        e = canonicalize(rand_expr(rng, 3, syms=("x",)))
        if e == ZERO:
            e = x
        try:
            tr = auto_integrate(IntegralProblem(e, "x"), policy)
            outcomes["ok"] += 1
            assert len(tr.table.rows) <= policy.max_rows
        except Exhausted:
            outcomes["exhausted"] += 1
    elapsed = time.perf_counter() - t0
    assert outcomes["ok"] + outcomes["exhausted"] == 1000
    print(f"PASS termination fuzz (1000 integrands: {outcomes['ok']} derived, "
          f"{outcomes['exhausted']} exhausted, {elapsed:.1f}s, no crashes)")
