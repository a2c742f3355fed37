import random
from fractions import Fraction

import pytest

from tabular_ibp.expr import (
    FUNCTIONS, add, atan, const, cos, exp, ln, mul, power, scale, sin, sym,
)


def rand_rational(rng, lo=-5, hi=5, nonzero=False):
    while True:
        v = Fraction(rng.randint(lo, hi), rng.randint(1, 4))
        if not nonzero or v != 0:
            return v


def rand_expr(rng, depth, syms=("x", "t")):
    """Random whitelist expression tree, small coefficients."""
    r = rng.random()
    if depth <= 0 or r < 0.22:
        choice = rng.random()
        if choice < 0.4:
            return const(rand_rational(rng))
        return sym(rng.choice(syms))
    if r < 0.45:
        return add(*[rand_expr(rng, depth - 1, syms) for _ in range(rng.randint(2, 3))])
    if r < 0.68:
        return mul(*[rand_expr(rng, depth - 1, syms) for _ in range(rng.randint(2, 3))])
    if r < 0.82:
        return power(rand_expr(rng, depth - 1, syms), const(rng.randint(-3, 3)))
    fn = {"ln": ln, "exp": exp, "sin": sin, "cos": cos, "atan": atan}[rng.choice(FUNCTIONS)]
    return fn(rand_expr(rng, depth - 1, syms))


def rand_poly(rng, var, max_deg=4):
    x = sym(var)
    deg = rng.randint(1, max_deg)
    coeffs = [rand_rational(rng) for _ in range(deg + 1)]
    while coeffs[deg] == 0:
        coeffs[deg] = rand_rational(rng)
    return add(*[scale(power(x, k), c) for k, c in enumerate(coeffs) if c != 0])


def rand_trig_exp(rng, var):
    x = sym(var)
    a = rand_rational(rng, -4, 4, nonzero=True)
    kind = rng.choice(["sin", "cos", "exp"])
    arg = scale(x, a)
    return {"sin": sin, "cos": cos, "exp": exp}[kind](arg)


@pytest.fixture
def rng():
    return random.Random(20260810)
