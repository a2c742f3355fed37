"""Record real session-service exchanges as test fixtures.

Runs the service in-process, drives the documented flows, and captures every
request/response pair byte-for-byte, plus the result of replaying the
client-emitted action log server-side.  The frontend tests assert against
these files, so they exercise the genuine protocol without a live server.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from tabular_ibp.service import create_app
from tabular_ibp.session import replay_log_text

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def record_flow(name: str, create_body: dict, actions: list[dict]) -> None:
    client = TestClient(create_app())
    exchanges = []

    def post(path, body):
        r = client.post(path, json=body)
        exchanges.append({
            "request": {"method": "POST", "path": path, "body": body},
            "response": {"status": r.status_code, "body": r.json()},
        })
        return r

    r = post("/session", create_body)
    sid = r.json().get("id")
    log = [{"seq": 0, "action": {"type": "create",
                                 "integrand": create_body["integrand"],
                                 "var": create_body["var"]}}]
    for action in actions:
        path = f"/session/{sid}/act"
        r = post(path, {"action": action})
        if r.status_code == 200:
            log.append({"seq": len(log), "action": action})
    fixture = {"name": name, "exchanges": exchanges}
    if sid is not None:
        # generalize the session id so the mock transport can match paths
        for ex in exchanges:
            ex["request"]["path"] = ex["request"]["path"].replace(sid, "{id}")
        final_view = exchanges[-1]["response"]["body"]
        replayed = replay_log_text("\n".join(json.dumps(e) for e in log))
        fixture["client_log"] = log
        fixture["replay"] = {
            "antiderivative": replayed.get("antiderivative"),
            "status": replayed.get("status"),
        }
        if isinstance(final_view, dict) and final_view.get("antiderivative"):
            assert (replayed["antiderivative"]["ascii"]
                    == final_view["antiderivative"]["ascii"]), name
    out = OUT / f"{name}.json"
    out.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print("wrote", out)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    record_flow(
        "example2_flow",
        {"integrand": "exp(3*x)*sin(2*x)", "var": "x"},
        [
            {"type": "choose_split", "index": 0},
            {"type": "step"},
            {"type": "step"},
            {"type": "stop", "mode": "self_similar"},
        ],
    )
    record_flow(
        "example3_flow",
        {"integrand": "(x^2-3*x)*sin(x)", "var": "x"},
        [
            {"type": "choose_split", "u": "sin(x)"},
            {"type": "step"},
            {"type": "undo"},
            {"type": "undo"},
            {"type": "choose_split", "index": 0},
            {"type": "step"},
            {"type": "step"},
            {"type": "stop", "mode": "direct"},
        ],
    )
    record_flow(
        "errors_flow",
        {"integrand": "(((", "var": "x"},
        [],
    )
    # a 409 surface for the toast path: stop too early
    client = TestClient(create_app())
    r = client.post("/session", json={"integrand": "ln(x)", "var": "x"})
    sid = r.json()["id"]
    r409 = client.post(f"/session/{sid}/act",
                       json={"action": {"type": "stop", "mode": "auto"}})
    fixture = {
        "name": "early_stop_409",
        "exchanges": [
            {"request": {"method": "POST", "path": "/session",
                         "body": {"integrand": "ln(x)", "var": "x"}},
             "response": {"status": 200, "body": r.json()}},
            {"request": {"method": "POST", "path": "/session/{id}/act",
                         "body": {"action": {"type": "stop", "mode": "auto"}}},
             "response": {"status": 409, "body": r409.json()}},
        ],
    }
    (OUT / "early_stop_409.json").write_text(
        json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print("wrote", OUT / "early_stop_409.json")

    # Taylor-mode replay payload straight from the CLI
    from click.testing import CliRunner
    from tabular_ibp.cli import main as cli_main

    res = CliRunner().invoke(cli_main, ["--json", "taylor", "sin(t)", "--n", "3"])
    assert res.exit_code == 0, res.output
    (OUT / "taylor_sin_n3.json").write_text(res.output)
    print("wrote", OUT / "taylor_sin_n3.json")


if __name__ == "__main__":
    main()
