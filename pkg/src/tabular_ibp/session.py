"""Interactive derivation sessions: one open table, row-by-row actions,
undo by state stack, deterministic views, and append-only action logs that
replay to the identical derivation."""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from .expr import Expr, divide
from .engine import (
    IntegralProblem, Split, Table, Policy, DerivationTrace,
    ZeroRow, Direct, SelfSimilar, Simpler, Harder,
    new_table, step, residual, classify, finalize, verify, suggest_splits,
    complexity_score, problem, lipet_class, NoRuleForDv, SplitMismatch,
    TooShort, FinalizeError,
)
from .parsing import parse, ParseError
from .rendering import render, render_table

_LIPET_LABELS = {0: "logarithm", 1: "inverse trig", 2: "polynomial",
                 3: "power", 4: "exponential", 5: "trigonometric"}


class SessionError(Exception):
    def __init__(self, status: int, code: str, message: str, span=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.span = span

    def body(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.span is not None:
            out["span"] = {"start": self.span.start, "end": self.span.end}
        return out


@dataclass
class Session:
    id: str
    problem: IntegralProblem
    stack: list[Optional[Table]]
    status: str = "open"  # open | finalized | abandoned
    trace: Optional[DerivationTrace] = None
    actions: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def table(self) -> Optional[Table]:
        return self.stack[-1]


def _expr_cell(e: Expr) -> dict:
    return {"ascii": render(e, "ascii"), "latex": render(e, "latex")}


def _hints(t: Optional[Table], p: IntegralProblem) -> list[dict]:
    if t is None or len(t.rows) < 2:
        return []
    o = classify(t)
    if isinstance(o, ZeroRow):
        return [{"tag": "zero_row", "can_stop": True, "stop_mode": "direct",
                 "text": "zero row: the derivation terminates exactly; stop to assemble"}]
    if isinstance(o, Direct):
        return [{"tag": "direct", "can_stop": True, "stop_mode": "direct",
                 "antiderivative": _expr_cell(o.residual_antiderivative),
                 "text": "the residual integrates directly; stop to assemble"}]
    if isinstance(o, SelfSimilar):
        return [{"tag": "self_similar", "can_stop": True, "stop_mode": "self_similar",
                 "c": f"{o.c.numerator}/{o.c.denominator}" if o.c.denominator != 1 else str(o.c.numerator),
                 "text": f"residual is a copy of the original scaled by {o.c}; "
                         "stop to solve algebraically"}]
    if isinstance(o, Harder):
        return [{"tag": "harder", "can_stop": False,
                 "residual_score": o.residual_score,
                 "original_score": o.original_score,
                 "text": "warning: the residual is at least as difficult as the original "
                         f"(score {o.residual_score} vs {o.original_score}); "
                         "consider undoing and choosing another split"
                         + (f" [{o.note}]" if o.note else "")}]
    assert isinstance(o, Simpler)
    return [{"tag": "simpler", "can_stop": False,
             "text": "residual is no harder; keep stepping or derive it in a separate table"}]


def session_view(s: Session) -> dict:
    t = s.table
    view: dict[str, Any] = {
        "id": s.id,
        "status": s.status,
        "problem": {"integrand": render(s.problem.integrand),
                    "latex": render(s.problem.integrand, "latex"),
                    "var": s.problem.var},
        "undo_depth": len(s.stack) - 1,
        "suggested_splits": [],
        "table": None,
        "residual": None,
        "hints": [],
        "difficulty": None,
        "antiderivative": None,
        "verified": None,
    }
    if t is None and s.status == "open":
        for i, sp in enumerate(suggest_splits(s.problem)):
            view["suggested_splits"].append({
                "index": i, "u": _expr_cell(sp.u), "dv": _expr_cell(sp.dv_integrand),
                "lipet_class": _LIPET_LABELS[lipet_class(sp.u, s.problem.var)]})
    if t is not None:
        view["table"] = {
            "rows": [{"sign": "+" if r.sign > 0 else "-",
                      "u": _expr_cell(r.u_entry), "dv": _expr_cell(r.dv_entry)}
                     for r in t.rows],
            "rendered": render_table(t, "ascii"),
        }
        if len(t.rows) >= 2:
            sign, integrand = residual(t)
            view["residual"] = {"sign": sign, "integrand": _expr_cell(integrand)}
            view["difficulty"] = {
                "original": complexity_score(s.problem.integrand, s.problem.var).score,
                "residual": complexity_score(integrand, s.problem.var).score,
            }
        view["hints"] = _hints(t, s.problem)
    if s.trace is not None:
        view["antiderivative"] = _expr_cell(s.trace.body)
        view["antiderivative"]["with_constant"] = (
            render(s.trace.body) + f" + {s.trace.constant_symbol}")
        view["verified"] = True
    return view


def view_fingerprint(view: dict) -> str:
    """Deterministic serialization, session id excluded (replay-stable)."""
    scrubbed = {k: v for k, v in view.items() if k != "id"}
    return json.dumps(scrubbed, sort_keys=True)


class SessionStore:
    """In-memory sessions with optional JSON-lines action logs."""

    def __init__(self, policy: Policy = Policy(), log_dir: Optional[str] = None):
        self.policy = policy
        self.log_dir = Path(log_dir) if log_dir else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- lifecycle ----------------------------------------------------------

    def create(self, integrand_text: str, var: str) -> Session:
        try:
            integrand = parse(integrand_text)
        except ParseError as exc:
            raise SessionError(400, "parse_error", exc.message, exc.span) from None
        p = problem(integrand, var)
        if not suggest_splits(p):
            raise SessionError(
                422, "no_splits",
                "no factorization offers a usable split (is the integrand constant?)")
        s = Session(id=uuid.uuid4().hex[:12], problem=p, stack=[None])
        self._log(s, {"type": "create", "integrand": integrand_text, "var": var})
        with self._lock:
            self._sessions[s.id] = s
        return s

    def get(self, session_id: str) -> Session:
        with self._lock:
            s = self._sessions.get(session_id)
        if s is None:
            raise SessionError(404, "unknown_session", f"no session {session_id!r}")
        return s

    # -- actions ------------------------------------------------------------

    def act(self, session_id: str, action: dict) -> Session:
        s = self.get(session_id)
        with s.lock:
            if s.status == "abandoned":
                raise SessionError(410, "abandoned", "session was abandoned")
            if s.status == "finalized" and action.get("type") != "abandon":
                raise SessionError(409, "finalized", "session is already finalized")
            self._apply(s, action)
            self._log(s, action)
        return s

    def _apply(self, s: Session, action: dict) -> None:
        kind = action.get("type")
        if kind == "choose_split":
            self._choose_split(s, action)
        elif kind == "step":
            self._step(s)
        elif kind == "stop":
            self._stop(s, action.get("mode", "auto"))
        elif kind == "undo":
            if len(s.stack) <= 1:
                raise SessionError(409, "nothing_to_undo", "already at the initial state")
            s.stack.pop()
        elif kind == "abandon":
            s.status = "abandoned"
        else:
            raise SessionError(409, "unknown_action", f"unknown action type {kind!r}")

    def _choose_split(self, s: Session, action: dict) -> None:
        splits = suggest_splits(s.problem)
        if "index" in action:
            idx = action["index"]
            if not isinstance(idx, int) or not 0 <= idx < len(splits):
                raise SessionError(409, "bad_split_index",
                                   f"split index {idx!r} out of range")
            split = splits[idx]
        elif "u" in action:
            try:
                u = parse(action["u"])
            except ParseError as exc:
                raise SessionError(400, "parse_error", exc.message, exc.span) from None
            if "dv" in action:
                try:
                    dv = parse(action["dv"])
                except ParseError as exc:
                    raise SessionError(400, "parse_error", exc.message, exc.span) from None
            else:
                dv = divide(s.problem.integrand, u)
            split = Split(u, dv)
        else:
            raise SessionError(409, "bad_action", "choose_split needs index or u")
        try:
            t = new_table(s.problem, split)
        except SplitMismatch as exc:
            raise SessionError(409, "split_mismatch", str(exc)) from None
        s.stack.append(t)

    def _step(self, s: Session) -> None:
        t = s.table
        if t is None:
            raise SessionError(409, "no_table", "choose a split first")
        if len(t.rows) >= self.policy.max_rows:
            raise SessionError(409, "row_limit",
                               f"table already has {len(t.rows)} rows (limit {self.policy.max_rows})")
        try:
            s.stack.append(step(t))
        except NoRuleForDv as exc:
            raise SessionError(409, "no_rule_for_dv",
                               "the dv column left the rule table; undo and re-split") from None

    def _stop(self, s: Session, mode: str) -> None:
        t = s.table
        if t is None or len(t.rows) < 2:
            raise SessionError(409, "too_short", "cannot stop before the table has two rows")
        o = classify(t)
        tag = getattr(o, "tag", "unknown")
        acceptable = {
            "auto": {"zero_row", "direct", "self_similar"},
            "direct": {"zero_row", "direct"},
            "self_similar": {"self_similar"},
        }.get(mode)
        if acceptable is None:
            raise SessionError(409, "bad_mode", f"unknown stop mode {mode!r}")
        if tag not in acceptable:
            raise SessionError(
                409, "wrong_outcome",
                f"stop mode {mode!r} does not match the detected outcome {tag!r}")
        try:
            trace = finalize(t, o)
        except (FinalizeError, TooShort) as exc:
            raise SessionError(409, "cannot_finalize", str(exc)) from None
        report = verify(trace)
        if not report.passed:
            raise SessionError(409, "verification_failed",
                               f"refusing to finalize: {report.detail}")
        s.trace = trace
        s.status = "finalized"

    # -- persistence & replay -------------------------------------------------

    def _log(self, s: Session, action: dict) -> None:
        entry = {"seq": len(s.actions), "action": action,
                 "timestamp": datetime.now(timezone.utc).isoformat()}
        s.actions.append(entry)
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            with open(self.log_dir / f"{s.id}.jsonl", "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def replay(self, entries: list[dict]) -> Session:
        """Rebuild a session from an action log (seq 0 must be create)."""
        if not entries:
            raise SessionError(409, "empty_log", "nothing to replay")
        ordered = sorted(entries, key=lambda e: e["seq"])
        head = ordered[0]["action"]
        if head.get("type") != "create":
            raise SessionError(409, "bad_log", "log must start with a create action")
        s = self.create(head["integrand"], head["var"])
        for entry in ordered[1:]:
            self.act(s.id, entry["action"])
        return s


def replay_log_text(text: str, policy: Policy = Policy()) -> dict:
    """Replay a JSON-lines action log in a fresh store; return the final view."""
    entries = [json.loads(line) for line in text.splitlines() if line.strip()]
    store = SessionStore(policy)
    s = store.replay(entries)
    return session_view(s)
