import threading

import pytest
from fastapi.testclient import TestClient

from tabular_ibp.expr import equals
from tabular_ibp.parsing import parse
from tabular_ibp.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


def _act(client, sid, action):
    return client.post(f"/session/{sid}/act", json={"action": action})


def test_create_returns_view(client):
    r = client.post("/session", json={"integrand": "ln(x)", "var": "x"})
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "open"
    assert body["problem"]["integrand"] == "ln(x)"
    assert body["suggested_splits"][0]["dv"]["ascii"] == "1"


def test_example2_flow_over_http(client):
    r = client.post("/session", json={"integrand": "exp(3*x)*sin(2*x)", "var": "x"})
    sid = r.json()["id"]
    assert _act(client, sid, {"type": "choose_split", "index": 0}).status_code == 200
    _act(client, sid, {"type": "step"})
    r = _act(client, sid, {"type": "step"})
    assert r.json()["hints"][0]["tag"] == "self_similar"
    r = _act(client, sid, {"type": "stop", "mode": "self_similar"})
    body = r.json()
    assert body["status"] == "finalized"
    assert equals(parse(body["antiderivative"]["ascii"]),
                  parse("exp(3*x)/13*(3*sin(2*x) - 2*cos(2*x))"))


def test_parse_error_400_with_span(client):
    r = client.post("/session", json={"integrand": "(((", "var": "x"})
    assert r.status_code == 400
    body = r.json()
    assert body["code"] == "parse_error" and "span" in body


def test_constant_integrand_422(client):
    r = client.post("/session", json={"integrand": "7", "var": "x"})
    assert r.status_code == 422


def test_unknown_session_404(client):
    assert client.get("/session/zzz").status_code == 404


def test_illegal_transition_409(client):
    r = client.post("/session", json={"integrand": "ln(x)", "var": "x"})
    sid = r.json()["id"]
    r = _act(client, sid, {"type": "stop", "mode": "auto"})
    assert r.status_code == 409


def test_delete_abandons_and_410_afterwards(client):
    r = client.post("/session", json={"integrand": "ln(x)", "var": "x"})
    sid = r.json()["id"]
    r = client.delete(f"/session/{sid}")
    assert r.status_code == 200 and r.json()["status"] == "abandoned"
    assert _act(client, sid, {"type": "step"}).status_code == 410


def test_concurrent_reads_identical(client):
    r = client.post("/session", json={"integrand": "ln(x)", "var": "x"})
    sid = r.json()["id"]
    _act(client, sid, {"type": "choose_split", "index": 0})
    bodies = []
    lock = threading.Lock()

    def read():
        resp = client.get(f"/session/{sid}")
        with lock:
            bodies.append(resp.text)

    threads = [threading.Thread(target=read) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len(set(bodies)) == 1


def test_expression_strings_use_ascii_grammar(client):
    r = client.post("/session", json={"integrand": "(x^2-3*x)*sin(x)", "var": "x"})
    body = r.json()
    for sp in body["suggested_splits"]:
        parse(sp["u"]["ascii"])
        parse(sp["dv"]["ascii"])
