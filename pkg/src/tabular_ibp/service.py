"""HTTP/JSON session service consumed by the web explorer.

Endpoints: POST /session, GET /session/{id}, POST /session/{id}/act,
DELETE /session/{id}.  Expressions travel as ASCII-grammar strings; latex
fields are display-only extras.  Errors are {code, message, span?}.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engine import Policy
from .session import SessionStore, SessionError, session_view


class CreateSession(BaseModel):
    integrand: str
    var: str = "x"


class Act(BaseModel):
    action: dict[str, Any]


def create_app(policy: Policy = Policy(), log_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="tabular-ibp session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(policy, log_dir)
    app.state.store = store

    @app.exception_handler(SessionError)
    async def _session_error(_request: Request, exc: SessionError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.post("/session")
    def create(body: CreateSession):
        s = store.create(body.integrand, body.var)
        return session_view(s)

    @app.get("/session/{session_id}")
    def state(session_id: str):
        return session_view(store.get(session_id))

    @app.post("/session/{session_id}/act")
    def act(session_id: str, body: Act):
        return session_view(store.act(session_id, body.action))

    @app.delete("/session/{session_id}")
    def abandon(session_id: str):
        s = store.get(session_id)
        if s.status != "abandoned":
            store.act(session_id, {"type": "abandon"})
        return session_view(s)

    return app
