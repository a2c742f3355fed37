"""Command-line interface.

Exit codes are the machine contract: 0 success, 2 parse error, 3 derivation
exhausted, 4 verification failure.
"""

from __future__ import annotations

import json
import sys

import click

from .expr import divide, eval_float
from .parsing import parse, parse_rational, ParseError
from .rendering import render, render_table
from .engine import (
    Split, Table, Policy, DerivationTrace,
    auto_integrate, verify, residual, partial_sum, problem,
    Exhausted, SplitMismatch, numeric_max_rel_error,
)
from .calculus import differentiate
from .showcase import (
    taylor, taylor_check, asymptotic_table, asymptotic_partial_sum,
    asymptotic_remainder_value, asymptotic_identity_check,
    worked_examples_report,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_EXHAUSTED = 3
EXIT_VERIFY = 4

_INT_SIGN = {1: "+", -1: "-"}


def _fail_parse(exc: ParseError) -> None:
    click.echo(f"parse error at [{exc.span.start}:{exc.span.end}]: {exc.message}",
               err=True)
    sys.exit(EXIT_PARSE)


def identity_line(t: Table, fmt: str) -> str:
    """The technically-true identity a table represents, residual included."""
    sign, res = residual(t)
    var = t.problem.var
    s = partial_sum(t)
    return (f"int {render(t.problem.integrand, fmt)} d{var} = "
            f"{render(s, fmt)} {_INT_SIGN[sign]} "
            f"int {render(res, fmt)} d{var} + C")


def _print_trace(tr: DerivationTrace, fmt: str, label: str = "table") -> None:
    click.echo(f"-- {label}: int {render(tr.table.problem.integrand, fmt)} "
               f"d{tr.table.problem.var}")
    click.echo(render_table(tr.table, fmt))
    click.echo(f"   outcome: {tr.outcome.tag}")
    for sub in tr.dv_resolutions:
        _print_trace(sub, fmt, label="dv-column derivation")
    for child in tr.children:
        _print_trace(child, fmt, label="recursive table")


@click.group()
@click.option("--format", "fmt", type=click.Choice(["ascii", "unicode", "latex"]),
              default="ascii", show_default=True, help="output rendering")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.pass_context
def main(ctx: click.Context, fmt: str, as_json: bool) -> None:
    """Tabular integration by parts: derive, explore, verify."""
    ctx.ensure_object(dict)
    ctx.obj["fmt"] = fmt
    ctx.obj["json"] = as_json


@main.command()
@click.argument("expr_text")
@click.option("--var", default="x", show_default=True)
@click.option("--u", "u_text", default=None, help="force this u for the first split")
@click.option("--dv", "dv_text", default=None, help="force this dv (defaults to integrand/u)")
@click.option("--trace", "show_trace", is_flag=True, help="print every table")
@click.option("--no-retry", is_flag=True, help="do not try other splits after a forced split fails")
@click.option("--max-rows", type=int, default=12, show_default=True)
@click.option("--max-recursion", type=int, default=32, show_default=True)
@click.option("--verify-mode", type=click.Choice(["auto", "symbolic", "numeric"]),
              default="auto", show_default=True)
@click.pass_context
def integrate(ctx, expr_text, var, u_text, dv_text, show_trace, no_retry,
              max_rows, max_recursion, verify_mode):
    """Derive an antiderivative of EXPR_TEXT and verify it."""
    fmt = ctx.obj["fmt"]
    try:
        integrand = parse(expr_text)
    except ParseError as exc:
        _fail_parse(exc)
    p = problem(integrand, var)
    forced = None
    if u_text is not None:
        try:
            u = parse(u_text)
            dv = parse(dv_text) if dv_text is not None else divide(p.integrand, u)
        except ParseError as exc:
            _fail_parse(exc)
        forced = Split(u, dv)
    policy = Policy(max_rows=max_rows, max_recursion=max_recursion,
                    retry=not no_retry)
    try:
        tr = auto_integrate(p, policy, forced_split=forced)
    except SplitMismatch as exc:
        click.echo(f"split mismatch: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except Exhausted as exc:
        click.echo("no derivation found within the policy limits", err=True)
        if show_trace:
            for a in exc.attempts:
                click.echo(f"-- abandoned split u = {render(a.split.u, fmt)}: {a.reason}",
                           err=True)
                if a.table is not None:
                    click.echo(render_table(a.table, fmt), err=True)
                    if len(a.table.rows) >= 2:
                        click.echo("   " + identity_line(a.table, fmt), err=True)
        sys.exit(EXIT_EXHAUSTED)
    report = verify(tr)
    if verify_mode == "symbolic":
        ok = report.symbolic
    elif verify_mode == "numeric":
        err = numeric_max_rel_error(
            differentiate(tr.final_antiderivative, var), p.integrand, var)
        ok = err is not None and err < 1e-9
    else:
        ok = report.passed
    if show_trace:
        for a in tr.abandoned:
            click.echo(f"-- abandoned split u = {render(a.split.u, fmt)}: {a.reason}")
            if a.table is not None:
                click.echo(render_table(a.table, fmt))
                if len(a.table.rows) >= 2:
                    click.echo("   warning: technically true but unhelpful:")
                    click.echo("   " + identity_line(a.table, fmt))
        _print_trace(tr, fmt)
    result = f"{render(tr.body, fmt)} + {tr.constant_symbol}"
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "antiderivative": render(tr.body, "ascii"),
            "latex": render(tr.body, "latex"),
            "constant": tr.constant_symbol,
            "verified": bool(ok),
            "symbolic": report.symbolic,
            "numeric_max_rel_error": report.numeric_max_rel_error,
        }, sort_keys=True))
    else:
        click.echo(result)
    sys.exit(EXIT_OK if ok else EXIT_VERIFY)


@main.command()
@click.pass_context
def examples(ctx):
    """Run every built-in worked example and report PASS/FAIL per line."""
    report = worked_examples_report()
    if ctx.obj["json"]:
        click.echo(json.dumps(report.to_json(), sort_keys=True))
    else:
        click.echo(report.to_text())
    sys.exit(EXIT_OK if report.passed else 1)


@main.command(name="taylor")
@click.argument("f_text")
@click.option("--a", "a_text", default="0", show_default=True,
              help="expansion center (rational)")
@click.option("--n", type=int, required=True, help="polynomial order")
@click.option("--var", default="t", show_default=True)
@click.option("--check", "x_sample", type=float, default=None,
              help="numerically check the remainder identity at x")
@click.pass_context
def taylor_cmd(ctx, f_text, a_text, n, var, x_sample):
    """Taylor polynomial with integral remainder, derived by a pinned table."""
    fmt = ctx.obj["fmt"]
    try:
        f = parse(f_text)
        a = parse_rational(a_text)
    except ParseError as exc:
        _fail_parse(exc)
    res = taylor(f, a, n, var=var)
    payload = {
        "center": str(a),
        "order": n,
        "polynomial": render(res.polynomial, "ascii"),
        "polynomial_latex": render(res.polynomial, "latex"),
        "remainder_integrand": render(res.remainder_integrand, "ascii"),
        "remainder_integrand_latex": render(res.remainder_integrand, "latex"),
        "table": None if res.table is None else {
            "rows": [{"sign": "+" if r.sign > 0 else "-",
                      "u": render(r.u_entry, "ascii"),
                      "u_latex": render(r.u_entry, "latex"),
                      "dv": render(r.dv_entry, "ascii"),
                      "dv_latex": render(r.dv_entry, "latex")}
                     for r in res.table.rows],
        },
    }
    if x_sample is not None:
        payload["check_x"] = x_sample
        payload["check_residual"] = taylor_check(f, a, n, x_sample, var=var)
    if ctx.obj["json"]:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(f"polynomial: {render(res.polynomial, fmt)}")
        click.echo(f"remainder integrand: {render(res.remainder_integrand, fmt)}")
        if res.table is not None:
            click.echo(render_table(res.table, fmt))
        if x_sample is not None:
            click.echo(f"remainder identity residual at x={x_sample}: "
                       f"{payload['check_residual']:.3e}")
    sys.exit(EXIT_OK)


@main.command(name="asymptotic")
@click.option("--x", "x_text", default="10", show_default=True)
@click.option("--n", type=int, default=3, show_default=True)
@click.pass_context
def asymptotic_cmd(ctx, x_text, n):
    """Finite-n asymptotic identity for the exponential-integral example."""
    fmt = ctx.obj["fmt"]
    try:
        xv = parse_rational(x_text)
    except ParseError as exc:
        _fail_parse(exc)
    table = asymptotic_table(n)
    partial = asymptotic_partial_sum(n)
    partial_val = eval_float(partial, {"x": float(xv)})
    remainder = asymptotic_remainder_value(xv, n)
    err = asymptotic_identity_check(xv, n)
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "x": str(xv), "n": n,
            "partial_sum": render(partial, "ascii"),
            "partial_sum_value": partial_val,
            "remainder_value": remainder,
            "identity_residual": err,
        }, sort_keys=True))
    else:
        click.echo(render_table(table, fmt))
        click.echo(f"partial sum: {render(partial, fmt)} = {partial_val!r} at x={xv}")
        click.echo(f"remainder term: {remainder!r}")
        click.echo(f"identity residual: {err:.3e}")
    sys.exit(EXIT_OK if err < 1e-8 else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=7341, show_default=True)
@click.option("--log-dir", default=None, help="append per-session action logs here")
@click.option("--max-rows", type=int, default=12, show_default=True)
def serve(host, port, log_dir, max_rows):
    """Run the HTTP/JSON session service for the web explorer."""
    import uvicorn

    from .service import create_app

    app = create_app(Policy(max_rows=max_rows), log_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
