import json

import pytest

from tabular_ibp.expr import equals
from tabular_ibp.parsing import parse
from tabular_ibp.session import (
    SessionError, SessionStore, replay_log_text, session_view, view_fingerprint,
)


@pytest.fixture
def store():
    return SessionStore()


def test_create_lists_suggestions_in_lipet_order(store):
    s = store.create("(x^2-3*x)*sin(x)", "x")
    v = session_view(s)
    us = [sp["u"]["ascii"] for sp in v["suggested_splits"]]
    assert us[0] in ("x^2 - 3*x", "-3*x + x^2")
    assert us[1] == "sin(x)"
    assert v["table"] is None and v["status"] == "open"


def test_create_single_suggestion_for_ln(store):
    s = store.create("ln(x)", "x")
    v = session_view(s)
    assert len(v["suggested_splits"]) == 1
    assert v["suggested_splits"][0]["u"]["ascii"] == "ln(x)"
    assert v["suggested_splits"][0]["dv"]["ascii"] == "1"


def test_create_parse_error(store):
    with pytest.raises(SessionError) as exc:
        store.create("(((", "x")
    assert exc.value.status == 400
    assert exc.value.span is not None
    body = exc.value.body()
    assert body["code"] == "parse_error" and "span" in body


def test_create_no_splits_is_422(store):
    with pytest.raises(SessionError) as exc:
        store.create("7", "x")
    assert exc.value.status == 422


def test_example2_full_flow(store):
    s = store.create("exp(3*x)*sin(2*x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "step"})
    v = session_view(s)
    hint = v["hints"][0]
    assert hint["tag"] == "self_similar" and hint["c"] == "-9/4"
    assert hint["can_stop"]
    store.act(s.id, {"type": "stop", "mode": "self_similar"})
    v = session_view(s)
    assert v["status"] == "finalized" and v["verified"] is True
    got = parse(v["antiderivative"]["ascii"])
    assert equals(got, parse("exp(3*x)/13*(3*sin(2*x) - 2*cos(2*x))"))


def test_undo_restores_view_exactly(store):
    s = store.create("(x^2-3*x)*sin(x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    before = view_fingerprint(session_view(s))
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "undo"})
    assert view_fingerprint(session_view(s)) == before


def test_example3_bad_split_then_recover(store):
    s = store.create("(x^2-3*x)*sin(x)", "x")
    store.act(s.id, {"type": "choose_split", "u": "sin(x)"})
    store.act(s.id, {"type": "step"})
    v = session_view(s)
    assert v["hints"][0]["tag"] == "harder"
    assert v["difficulty"]["residual"] > v["difficulty"]["original"]
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "stop", "mode": "auto"})
    assert exc.value.status == 409
    store.act(s.id, {"type": "undo"})
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "stop", "mode": "direct"})
    v = session_view(s)
    assert equals(parse(v["antiderivative"]["ascii"]),
                  parse("(3*x - x^2)*cos(x) + (2*x - 3)*sin(x) + 2*cos(x)"))


def test_stop_mode_must_match(store):
    s = store.create("exp(3*x)*sin(2*x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "step"})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "stop", "mode": "direct"})
    assert exc.value.status == 409
    store.act(s.id, {"type": "stop", "mode": "auto"})  # auto accepts any


def test_stop_on_one_row_table_is_409(store):
    s = store.create("ln(x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "stop", "mode": "auto"})
    assert exc.value.status == 409


def test_step_past_row_limit_is_409():
    from tabular_ibp.engine import Policy
    store = SessionStore(Policy(max_rows=3))
    s = store.create("x^4*sin(x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "step"})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "step"})
    assert exc.value.status == 409 and exc.value.code == "row_limit"


def test_unknown_session_404(store):
    with pytest.raises(SessionError) as exc:
        store.get("nope")
    assert exc.value.status == 404


def test_abandoned_session_410(store):
    s = store.create("ln(x)", "x")
    store.act(s.id, {"type": "abandon"})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "step"})
    assert exc.value.status == 410


def test_undo_at_initial_state_409(store):
    s = store.create("ln(x)", "x")
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "undo"})
    assert exc.value.status == 409


def test_no_rule_for_dv_is_409(store):
    s = store.create("ln(x)*atan(x)", "x")
    store.act(s.id, {"type": "choose_split", "u": "ln(x)"})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "step"})
    assert exc.value.status == 409 and exc.value.code == "no_rule_for_dv"


def test_split_mismatch_is_409(store):
    s = store.create("ln(x)", "x")
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "choose_split", "u": "x", "dv": "x"})
    assert exc.value.status == 409


def test_replay_reproduces_final_view(store):
    s = store.create("exp(3*x)*sin(2*x)", "x")
    for action in ({"type": "choose_split", "index": 0}, {"type": "step"},
                   {"type": "step"}, {"type": "stop", "mode": "self_similar"}):
        store.act(s.id, action)
    log = "\n".join(json.dumps(e, sort_keys=True) for e in s.actions)
    replayed = replay_log_text(log)
    assert view_fingerprint(replayed) == view_fingerprint(session_view(s))


def test_replay_with_undo_in_log(store):
    s = store.create("(x^2-3*x)*sin(x)", "x")
    for action in ({"type": "choose_split", "u": "sin(x)"}, {"type": "step"},
                   {"type": "undo"}, {"type": "undo"},
                   {"type": "choose_split", "index": 0}, {"type": "step"},
                   {"type": "step"}, {"type": "stop", "mode": "direct"}):
        store.act(s.id, action)
    log = "\n".join(json.dumps(e, sort_keys=True) for e in s.actions)
    replayed = replay_log_text(log)
    assert view_fingerprint(replayed) == view_fingerprint(session_view(s))


def test_action_log_file_format(tmp_path):
    store = SessionStore(log_dir=str(tmp_path))
    s = store.create("ln(x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    log_file = tmp_path / f"{s.id}.jsonl"
    lines = log_file.read_text().splitlines()
    assert len(lines) == 3
    for i, line in enumerate(lines):
        entry = json.loads(line)
        assert entry["seq"] == i
        assert "action" in entry and "timestamp" in entry
    assert json.loads(lines[0])["action"]["type"] == "create"


def test_finalized_session_rejects_actions(store):
    s = store.create("ln(x)", "x")
    store.act(s.id, {"type": "choose_split", "index": 0})
    store.act(s.id, {"type": "step"})
    store.act(s.id, {"type": "stop", "mode": "direct"})
    with pytest.raises(SessionError) as exc:
        store.act(s.id, {"type": "step"})
    assert exc.value.status == 409
