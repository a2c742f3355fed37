"""Tabular integration by parts: exact symbolic engine, row-by-row
interactive derivations, and verified reproductions of the method's
worked results."""

from .expr import (
    Expr, Const, Sym, Add, Mul, Pow, Fun, Rational,
    canonicalize, equals, expand, constant_ratio, substitute,
    complexity_score, ComplexityScore, eval_float, EvalError,
)
from .parsing import parse, ParseError, SourceSpan
from .rendering import render, render_table
from .calculus import differentiate, antiderivative, antiderivative_with_constant, RuleHit
from .engine import (
    IntegralProblem, Split, Table, TableRow, Policy, Outcome,
    ZeroRow, Direct, SelfSimilar, Simpler, Harder, Unknown,
    DerivationTrace, VerificationReport,
    suggest_splits, new_table, step, residual, partial_sum, classify,
    finalize, auto_integrate, verify, problem,
    EngineError, SplitMismatch, NoRuleForDv, TooShort, FinalizeError,
    SelfSimilarSingular, Exhausted,
)
from .quadrature import quad, QuadResult, NonFinite, NoConvergence
from .showcase import (
    taylor, TaylorResult, taylor_check, definite,
    asymptotic_identity_check, run_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
