"""Adaptive Simpson quadrature: the independent numerical oracle.

Panel bisection with Richardson extrapolation; improper upper limits are
mapped to [0, 1) by t = a + s/(1-s), which needs the integrand to decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .expr import Expr, eval_float, EvalError


class QuadratureError(Exception):
    pass


class NonFinite(QuadratureError):
    """The integrand produced NaN/inf (or a domain error) inside a panel."""


class NoConvergence(QuadratureError):
    """The evaluation budget ran out before the tolerance was met."""


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int


_INITIAL_PANELS = 8
_MAX_DEPTH = 60


def quad(e: Expr, var: str, a: float, b: float, tol: float = 1e-10,
         env: Optional[Mapping[str, float]] = None,
         max_evaluations: int = 10 ** 6) -> QuadResult:
    """Integrate e with respect to var from a to b (b may be math.inf)."""
    base_env = dict(env or {})
    count = [0]

    def f(x: float) -> float:
        if count[0] >= max_evaluations:
            raise NoConvergence(f"evaluation budget {max_evaluations} exhausted")
        count[0] += 1
        base_env[var] = x
        try:
            v = eval_float(e, base_env)
        except EvalError as exc:
            raise NonFinite(str(exc)) from None
        if not math.isfinite(v):
            raise NonFinite(f"integrand not finite at {var} = {x}")
        return v

    if b == math.inf:
        # t = a + s/(1-s) maps [0,1) onto [a,inf); ds weight 1/(1-s)^2.
        def g(s: float) -> float:
            if s >= 1.0:
                return 0.0
            w = 1.0 - s
            return f(a + s / w) / (w * w)

        value, err = _adaptive(g, 0.0, 1.0, tol)
    elif a == b:
        return QuadResult(0.0, 0.0, 0)
    elif a > b:
        r = quad(e, var, b, a, tol, env, max_evaluations)
        return QuadResult(-r.value, r.error_estimate, r.evaluations)
    else:
        value, err = _adaptive(f, a, b, tol)
    return QuadResult(value, err, count[0])


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    total = 0.0
    total_err = 0.0
    width = (b - a) / _INITIAL_PANELS
    for i in range(_INITIAL_PANELS):
        pa = a + i * width
        pb = pa + width
        pm = 0.5 * (pa + pb)
        fa, fm, fb = f(pa), f(pm), f(pb)
        s = _simpson(fa, fm, fb, pb - pa)
        v, err = _panel(f, pa, pb, fa, fm, fb, s, tol / _INITIAL_PANELS, 0)
        total += v
        total_err += err
    return total, total_err


def _panel(f, a, b, fa, fm, fb, whole, tol, depth) -> tuple[float, float]:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = (left + right - whole) / 15.0
    if depth >= _MAX_DEPTH or abs(delta) <= tol:
        return left + right + delta, abs(delta)
    lv, le = _panel(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
    rv, re_ = _panel(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
    return lv + rv, le + re_
