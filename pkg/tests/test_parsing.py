import pytest

from tabular_ibp.expr import (
    Add, Const, Fun, Mul, Pow, Sym, ZERO, equals, eval_float, mul, negate,
    power, scale, sym, const, cos,
)
from tabular_ibp.parsing import ParseError, parse, parse_rational
from tabular_ibp.rendering import render
from conftest import rand_expr

x = sym("x")


def test_example3_integrand_structure():
    e = parse("(x^2 - 3*x)*sin(x)")
    assert isinstance(e, Mul) and len(e.factors) == 2
    assert Fun("sin", x) in e.factors
    assert Add((Pow(x, const(2)), Mul((const(-3), x)))) in e.factors


def test_single_function():
    assert parse("ln(x)") == Fun("ln", x)


def test_implicit_multiplication_rejected():
    with pytest.raises(ParseError) as exc:
        parse("2x")
    assert (exc.value.span.start, exc.value.span.end) == (1, 2)
    assert "implicit" in exc.value.message


def test_power_right_associative():
    assert eval_float(parse("2^3^2"), {}) == 512.0


def test_unary_minus_binds_looser_than_power():
    assert equals(parse("-x^2"), negate(power(x, 2)))


def test_rational_literals():
    assert parse("5/21") == Const(__import__("fractions").Fraction(5, 21))
    assert parse_rational("-3/4") == __import__("fractions").Fraction(-3, 4)


@pytest.mark.parametrize("bad", ["", "   ", "(((", "x +", "tan(x)", "1.5", "x ? y", "a b"])
def test_errors_carry_spans(bad):
    with pytest.raises(ParseError) as exc:
        parse(bad)
    span = exc.value.span
    assert 0 <= span.start <= span.end <= len(bad)


def test_unknown_function_message():
    with pytest.raises(ParseError) as exc:
        parse("sec(x)")
    assert "unknown function" in exc.value.message


def test_roundtrip_random(rng):
    for _ in range(1000):
        e = rand_expr(rng, 3)
        s = render(e, "ascii")
        assert equals(parse(s), e), s


def test_latex_golden_cell():
    e = mul(const(__import__("fractions").Fraction(-1, 2)), cos(scale(x, 2)))
    assert render(e, "latex") == r"-\frac{1}{2}\cos(2 x)"


def test_zero_renders_in_all_formats():
    for fmt in ("ascii", "unicode", "latex"):
        assert render(ZERO, fmt) == "0"


def test_latex_fraction_and_exp():
    from tabular_ibp.expr import exp, ln, mul, power
    assert render(power(x, -1), "latex") == r"\frac{1}{x}"
    assert render(mul(const(2), power(x, -1), ln(x)), "latex") == r"\frac{2 \ln(x)}{x}"
    assert render(exp(scale(x, 3)), "latex") == "e^{3 x}"


def test_unicode_uses_dot_multiplication():
    s = render(mul(const(2), x), "unicode")
    assert "·" in s
