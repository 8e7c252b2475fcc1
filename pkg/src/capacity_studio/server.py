"""HTTP session service for the iterative elicitation dialogue.

Sessions hold the working state of one elicitation: criterion names,
the current constraint set (preferences, linguistic statements, interval
scores), uploaded samples and concepts, and the latest identification
result per method. Every mutation bumps the session revision; results
are tagged with the revision they were computed at, so a client can tell
when a result predates the constraints it is looking at. Results also
accumulate in a history list, so the one before a re-solve stays
retrievable.

Clients coordinate optimistically by sending If-Match with the revision
they last saw; a stale value gets 409 plus the current revision to
recover with. Handler bodies run under one store-wide mutex: solves
finish in well under a second at the supported scale (n <= 8), and a
single lock keeps revision checks and snapshots trivially consistent.

Status codes: 400 malformed input, 404 unknown session or no result
yet, 409 stale If-Match, 422 infeasible constraint system (body carries
the report). Session-scoped responses carry the revision, in the body
where the shape allows and always in the ETag header.

State lives in memory. Pass snapshot_path to also persist every change
to a JSON file that is reloaded on startup.
"""

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .capacity import capacity_from_dict, densities_from_dict, dumps_capacity, is_valid
from .concepts import concepts_from_dict, rank_concepts
from .errors import InfeasibleError, NumericError
from .learning import identify_from_data, preferences_from_json, samples_from_json
from .semantic import (
    constraints_from_json,
    identify_semantic,
    interval_scores_from_json,
)
from .sugeno import identify_sugeno

METHODS = ("sugeno", "learn", "semantic")


class ApiError(Exception):
    def __init__(self, status: int, detail: str, extra: dict | None = None):
        self.status = status
        self.detail = detail
        self.extra = extra or {}
        super().__init__(detail)


def _new_session(criteria: list[str]) -> dict:
    return {
        "id": uuid.uuid4().hex,
        "criteria": list(criteria),
        "revision": 0,
        "constraints": {"linguistic": [], "preferences": [], "intervals": []},
        "samples": [],
        "concepts": None,
        "densities": None,
        "results": {},
        "history": [],
        "last_method": None,
    }


class SessionStore:
    """In-memory session registry behind one reentrant mutex."""

    def __init__(self, snapshot_path: str | None = None):
        self._sessions: dict[str, dict] = {}
        self.mutex = threading.RLock()
        self._snapshot_path = snapshot_path
        if snapshot_path and os.path.exists(snapshot_path):
            with open(snapshot_path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            self._sessions.update(data.get("sessions", {}))

    def create(self, criteria: list[str]) -> dict:
        with self.mutex:
            state = _new_session(criteria)
            self._sessions[state["id"]] = state
            self.snapshot()
            return state

    def get(self, session_id: str) -> dict:
        # caller holds the mutex
        try:
            return self._sessions[session_id]
        except KeyError:
            raise ApiError(404, f"unknown session {session_id!r}") from None

    def delete(self, session_id: str) -> dict:
        with self.mutex:
            state = self.get(session_id)
            del self._sessions[session_id]
            self.snapshot()
            return state

    def snapshot(self) -> None:
        if not self._snapshot_path:
            return
        with self.mutex:
            text = json.dumps({"sessions": self._sessions}, indent=2)
        tmp = f"{self._snapshot_path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, self._snapshot_path)


def _check_precondition(request: Request, state: dict) -> None:
    raw = request.headers.get("if-match")
    if raw is None:
        return
    token = raw.strip()
    if token.startswith("W/"):
        token = token[2:]
    token = token.strip('"')
    try:
        expected = int(token)
    except ValueError:
        raise ApiError(400, f"If-Match is not a revision number: {raw!r}") from None
    if expected != state["revision"]:
        raise ApiError(
            409,
            f"revision {expected} is stale, session is at {state['revision']}",
            {"revision": state["revision"]},
        )


def _session_doc(state: dict) -> dict:
    doc = {k: v for k, v in state.items() if k != "last_method"}
    doc["n"] = len(state["criteria"])
    return doc


def _json(state: dict | None, payload: dict, status: int = 200) -> JSONResponse:
    headers = {}
    if state is not None:
        payload.setdefault("revision", state["revision"])
        headers["ETag"] = f'"{state["revision"]}"'
    return JSONResponse(payload, status_code=status, headers=headers)


def _require_list(payload: Any, what: str) -> list:
    if payload is None:
        return []
    if not isinstance(payload, list):
        raise ApiError(400, f"{what} must be a JSON array")
    return payload


def _validate_constraint_set(state: dict, doc: Any) -> dict:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ApiError(400, "constraint set must be a JSON object")
    unknown = set(doc) - {"linguistic", "preferences", "intervals"}
    if unknown:
        raise ApiError(400, f"unknown constraint fields {sorted(unknown)}")
    n = len(state["criteria"])
    linguistic = _require_list(doc.get("linguistic"), "linguistic")
    constraints = constraints_from_json(linguistic)
    for con in constraints:
        top = max(con.a + con.b)
        if top > n:
            raise ApiError(
                400, f"constraint references criterion {top}, session has {n}"
            )
    preferences_from_json(_require_list(doc.get("preferences"), "preferences"))
    interval_scores_from_json(_require_list(doc.get("intervals"), "intervals"))
    return {
        "linguistic": linguistic,
        "preferences": list(doc.get("preferences") or []),
        "intervals": list(doc.get("intervals") or []),
    }


def _solve(state: dict, method: str, payload: Any):
    n = len(state["criteria"])
    if method == "sugeno":
        doc = state["densities"]
        if isinstance(payload, dict) and payload:
            doc = payload.get("densities", payload)
        if doc is None:
            raise ApiError(
                400, "identify sugeno needs singleton densities in the body"
            )
        densities = densities_from_dict(doc)
        if len(densities) != n:
            raise ApiError(400, f"{len(densities)} densities for {n} criteria")
        return identify_sugeno(densities), doc
    if method == "learn":
        samples = samples_from_json(state["samples"])
        preferences = preferences_from_json(state["constraints"]["preferences"])
        return identify_from_data(samples, preferences, n=n), None
    constraints = constraints_from_json(state["constraints"]["linguistic"])
    scores = interval_scores_from_json(state["constraints"]["intervals"])
    samples = samples_from_json(state["samples"])
    return identify_semantic(constraints, scores, samples, n=n), None


def _pick_result(state: dict, method: str | None) -> dict:
    if method is None:
        method = state.get("last_method")
    if method is None:
        raise ApiError(404, "no identification result in this session yet")
    if method not in METHODS:
        raise ApiError(400, f"unknown method {method!r}")
    result = state["results"].get(method)
    if result is None:
        raise ApiError(404, f"no {method} result in this session yet")
    return result


def _resolve_static(static_dir: str | None) -> str | None:
    candidate = static_dir or os.environ.get("CAPACITY_STUDIO_UI")
    if candidate:
        if not os.path.isdir(candidate):
            raise ValueError(f"UI bundle directory not found: {candidate}")
        return candidate
    default = Path.cwd() / "frontend" / "dist"
    return str(default) if default.is_dir() else None


def create_app(
    snapshot_path: str | None = None, static_dir: str | None = None
) -> FastAPI:
    store = SessionStore(snapshot_path)
    app = FastAPI(title="capacity-studio", docs_url="/docs")
    ui_dir = _resolve_static(static_dir)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        body = {"detail": exc.detail}
        body.update(exc.extra)
        return JSONResponse(body, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def handle_malformed(request: Request, exc: RequestValidationError):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(InfeasibleError)
    async def handle_infeasible(request: Request, exc: InfeasibleError):
        return JSONResponse(
            {"detail": str(exc), "report": exc.report.to_dict()},
            status_code=422,
        )

    @app.exception_handler(NumericError)
    async def handle_numeric(request: Request, exc: NumericError):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.post("/sessions")
    def create_session(payload: Any = Body(None)):
        if not isinstance(payload, dict):
            raise ApiError(400, 'body must be {"criteria": [names]}')
        unknown = set(payload) - {"criteria"}
        if unknown:
            raise ApiError(400, f"unknown session fields {sorted(unknown)}")
        criteria = payload.get("criteria")
        if (
            not isinstance(criteria, list)
            or not 2 <= len(criteria) <= 8
            or not all(isinstance(c, str) and c.strip() for c in criteria)
            or len(set(criteria)) != len(criteria)
        ):
            raise ApiError(400, "criteria must be 2..8 distinct nonempty names")
        state = store.create(criteria)
        return _json(state, _session_doc(state), status=201)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        with store.mutex:
            state = store.get(session_id)
            return _json(state, _session_doc(state))

    @app.delete("/sessions/{session_id}")
    def delete_session(request: Request, session_id: str):
        with store.mutex:
            state = store.get(session_id)
            _check_precondition(request, state)
            store.delete(session_id)
            return _json(state, {"id": session_id, "deleted": True})

    @app.put("/sessions/{session_id}/constraints")
    def put_constraints(
        request: Request, session_id: str, payload: Any = Body(None)
    ):
        with store.mutex:
            state = store.get(session_id)
            _check_precondition(request, state)
            state["constraints"] = _validate_constraint_set(state, payload)
            state["revision"] += 1
            store.snapshot()
            return _json(state, _session_doc(state))

    @app.post("/sessions/{session_id}/samples")
    def post_samples(request: Request, session_id: str, payload: Any = Body(None)):
        with store.mutex:
            state = store.get(session_id)
            _check_precondition(request, state)
            if isinstance(payload, dict) and set(payload) == {"samples"}:
                payload = payload["samples"]
            records = _require_list(payload, "samples")
            samples = samples_from_json(records)
            n = len(state["criteria"])
            for k, sample in enumerate(samples, start=1):
                if len(sample.scores) != n:
                    raise ApiError(
                        400,
                        f"sample {k} scores {len(sample.scores)} criteria, "
                        f"session has {n}",
                    )
            state["samples"] = records
            state["revision"] += 1
            store.snapshot()
            return _json(state, _session_doc(state))

    @app.post("/sessions/{session_id}/concepts")
    def post_concepts(request: Request, session_id: str, payload: Any = Body(None)):
        with store.mutex:
            state = store.get(session_id)
            _check_precondition(request, state)
            cset = concepts_from_dict(payload)
            if cset.n != len(state["criteria"]):
                raise ApiError(
                    400,
                    f"concepts carry {cset.n} criteria, session has "
                    f"{len(state['criteria'])}",
                )
            state["concepts"] = payload
            state["revision"] += 1
            store.snapshot()
            return _json(state, _session_doc(state))

    @app.post("/sessions/{session_id}/identify")
    def identify(request: Request, session_id: str, payload: Any = Body(None)):
        method = request.query_params.get("method")
        if method not in METHODS:
            raise ApiError(
                400, f"method must be one of {', '.join(METHODS)}, got {method!r}"
            )
        with store.mutex:
            state = store.get(session_id)
            _check_precondition(request, state)
            result, densities = _solve(state, method, payload)
            if densities is not None and densities != state["densities"]:
                state["densities"] = densities
                state["revision"] += 1
            doc = result.to_dict()
            doc["revision"] = state["revision"]
            state["results"][method] = doc
            state["history"].append(doc)
            state["last_method"] = method
            store.snapshot()
            return _json(state, dict(doc))

    @app.get("/sessions/{session_id}/indices")
    def get_indices(request: Request, session_id: str):
        with store.mutex:
            state = store.get(session_id)
            result = _pick_result(state, request.query_params.get("method"))
            return _json(
                state,
                {
                    "method": result["method"],
                    "computed_at": result["revision"],
                    "indices": result["indices"],
                },
            )

    @app.get("/sessions/{session_id}/capacity")
    def get_capacity(request: Request, session_id: str):
        with store.mutex:
            state = store.get(session_id)
            result = _pick_result(state, request.query_params.get("method"))
            cap = capacity_from_dict(result["capacity"])
            if not is_valid(cap):
                raise ApiError(500, "stored capacity fails validation")
            return Response(
                content=dumps_capacity(cap),
                media_type="application/json",
                headers={"ETag": f'"{state["revision"]}"'},
            )

    @app.post("/sessions/{session_id}/rank")
    def rank(request: Request, session_id: str, payload: Any = Body(None)):
        with store.mutex:
            state = store.get(session_id)
            if state["concepts"] is None:
                raise ApiError(400, "upload concepts before ranking")
            cset = concepts_from_dict(state["concepts"])
            method = None
            if isinstance(payload, dict):
                method = payload.get("method")
            if isinstance(payload, dict) and "capacity" in payload:
                cap = capacity_from_dict(payload["capacity"])
                source = "request"
            else:
                result = _pick_result(state, method)
                cap = capacity_from_dict(result["capacity"])
                source = result["method"]
            if not is_valid(cap):
                raise ApiError(400, "capacity fails validation")
            ranked = rank_concepts(cap, cset.concepts)
            return _json(
                state,
                {
                    "capacity_source": source,
                    "ranking": [r.to_dict() for r in ranked],
                },
            )

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def root():
            return {
                "service": "capacity-studio",
                "endpoints": [
                    "POST /sessions",
                    "GET /sessions/{id}",
                    "PUT /sessions/{id}/constraints",
                    "POST /sessions/{id}/samples",
                    "POST /sessions/{id}/concepts",
                    "POST /sessions/{id}/identify?method=sugeno|learn|semantic",
                    "GET /sessions/{id}/indices",
                    "GET /sessions/{id}/capacity",
                    "POST /sessions/{id}/rank",
                    "DELETE /sessions/{id}",
                ],
            }

    return app
