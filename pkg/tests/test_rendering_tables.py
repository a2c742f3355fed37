from tabular_ibp.engine import Split, new_table, problem, step
from tabular_ibp.expr import ONE, ln, sym
from tabular_ibp.parsing import parse
from tabular_ibp.rendering import render_table

x = sym("x")


def _example1_table():
    t = new_table(problem(ln(x), "x"), Split(ln(x), ONE))
    return step(t)


def test_example1_rows_and_residual():
    out = render_table(_example1_table(), "ascii")
    lines = out.splitlines()
    assert lines[0].split() == ["+", "ln(x)", "1"]
    assert lines[1].split() == ["-", "x^(-1)", "x"]
    assert lines[2] == "residual: - int 1 dx"


def test_example2_third_row():
    t = new_table(problem(parse("exp(3*x)*sin(2*x)"), "x"),
                  Split(parse("exp(3*x)"), parse("sin(2*x)")))
    t = step(step(t))
    lines = render_table(t, "ascii").splitlines()
    assert lines[2].split() == ["+", "9*exp(3*x)", "-1/4*sin(2*x)"]
    assert "residual" in lines[3]


def test_single_row_table_prints_original_only():
    t = new_table(problem(ln(x), "x"), Split(ln(x), ONE))
    out = render_table(t, "ascii")
    assert out.splitlines() == ["+  ln(x)  1"]


def test_unicode_table_uses_integral_sign():
    out = render_table(_example1_table(), "unicode")
    assert "∫" in out


def test_latex_table_structure():
    out = render_table(_example1_table(), "latex")
    assert out.startswith(r"\begin{array}")
    assert r"\ln(x)" in out
    assert r"\int" in out
    assert r"\end{array}" in out
