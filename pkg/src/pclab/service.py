"""HTTP session service: a human plays the expert against a live learner.

Two modes.  Oracle: the space's target is ground truth, human corrections are
validated against it (mistakes come back as 422 and are not recorded).
Authoritative: the human IS the target, so only internal consistency with the
session's own transcript is enforced; an accept asserts all c displayed
values at once and err/err_c are never exposed.

All mutations of one session are serialized behind a per-session lock; the
learner is the deterministic base algorithm (lowest-indexed consistent
hypothesis after every feedback event), which makes exported transcripts
replayable to the identical state.
"""

from __future__ import annotations

import math
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import trees
from .errors import MalformedSpecError, PclabError, SpaceBudgetError
from .protocol import Transcript, accept_record, correct_record, transcript_to_jsonl
from .spaces import build_space, parse_space_spec

SPACE_CATALOG = [
    {
        "kind": "grid",
        "example": "grid:M=10,c=3,pool=40,seed=7",
        "description": "threshold on [0,1] over a grid of M+1 cut points; "
        "queries are c labeled points",
    },
    {
        "kind": "twopoint",
        "example": "twopoint:c=4,eps=0.05",
        "description": "two-query threshold construction (rare low / common high query)",
    },
    {
        "kind": "sparse",
        "example": "sparse:ell=2,c=3,eps=0.25",
        "description": "sparse binary components; at most one 1 per special query",
    },
    {
        "kind": "triplet",
        "example": "triplet:n=5,m=4",
        "description": "rooted trees on n leaves; queries show an m-leaf subtree "
        "with its correctable triplet topologies",
    },
]


class ApiError(Exception):
    def __init__(self, status, error, detail):
        self.status = status
        self.error = error
        self.detail = detail
        super().__init__(detail)


class CreateSessionRequest(BaseModel):
    space: str | dict
    mode: str = "oracle"
    seed: int | None = None
    epsilon: float = 0.2
    delta: float = 0.1
    target: int | str | None = None


class FeedbackRequest(BaseModel):
    step: int
    action: str  # "accept" | "correct"
    component: int | None = None
    value: int | str | None = None


class Session:
    """One live learner run plus its append-only transcript."""

    def __init__(self, config, default_seed=0):
        spec = config.space
        if isinstance(spec, str):
            try:
                spec = parse_space_spec(spec)
            except MalformedSpecError as exc:
                raise ApiError(422, "invalid_space", str(exc))
        if config.target is not None:
            spec = {**spec, "target": config.target}
        try:
            self.space = build_space(spec)
        except (MalformedSpecError, SpaceBudgetError) as exc:
            raise ApiError(422, "invalid_space", str(exc))
        if config.mode not in ("oracle", "authoritative"):
            raise ApiError(422, "invalid_mode", f"unknown mode {config.mode!r}")
        self.id = uuid.uuid4().hex[:12]
        self.mode = config.mode
        self.seed = default_seed if config.seed is None else config.seed
        self.epsilon = config.epsilon
        self.delta = config.delta
        self.lock = threading.Lock()
        self.rng = np.random.default_rng(self.seed)
        self.transcript = Transcript()
        self.mask = np.ones(self.space.n_hypotheses, dtype=bool)
        self.current = 0  # lowest consistent index; everything starts consistent
        self.step = 0  # completed feedback events
        self.streak = 0
        self.terminated = False
        self.history = [self._history_point()]
        self._cum_mu = np.cumsum(self.space.mu)
        self.query = self._draw_query()

    # -- learner mechanics ---------------------------------------------------

    @property
    def window(self):
        ell = math.log(self.space.n_hypotheses / self.delta)
        return math.ceil(ell / (self.epsilon / 2))

    def _draw_query(self):
        return int(np.searchsorted(self._cum_mu, self.rng.random(), side="right"))

    def _reselect(self):
        surviving = np.flatnonzero(self.mask)
        if surviving.size:
            self.current = int(surviving[0])

    def _history_point(self):
        point = {"step": self.step, "version_space_size": int(self.mask.sum())}
        if self.mode == "oracle":
            point["err"] = self.space.err(self.current)
            point["err_c"] = self.space.err_c(self.current)
        return point

    def _advance(self):
        self._reselect()
        self.step += 1
        self.history.append(self._history_point())
        if self.streak >= self.window or int(self.mask.sum()) <= 1:
            self.terminated = True
        else:
            self.query = self._draw_query()

    # -- feedback ------------------------------------------------------------

    def apply(self, payload):
        if self.terminated:
            raise ApiError(409, "terminated", "session already terminated")
        if payload.step != self.step:
            raise ApiError(
                409,
                "stale_step",
                f"payload references step {payload.step}, session is at {self.step}",
            )
        if payload.action == "accept":
            self._apply_accept()
        elif payload.action == "correct":
            self._apply_correction(payload)
        else:
            raise ApiError(422, "invalid_action", f"unknown action {payload.action!r}")
        self._advance()

    def _apply_accept(self):
        displayed = self.space.evaluate(self.current, self.query)
        if self.mode == "oracle":
            truth = self.space.evaluate(self.space.target, self.query)
            if displayed != truth:
                raise ApiError(
                    422,
                    "not_correct",
                    "the displayed answer differs from the target; accept is only "
                    "valid when every component is correct",
                )
        rec = accept_record(self.step + 1, self.query, displayed)
        self.transcript.append(rec)
        self.mask &= self.space.accept_elimination(self.query, rec.displayed)
        self.streak += 1

    def _apply_correction(self, payload):
        j = payload.component
        if j is None or payload.value is None:
            raise ApiError(422, "invalid_correction", "correction needs component and value")
        if not 0 <= j < self.space.c:
            raise ApiError(422, "invalid_correction", f"component {j} out of range")
        try:
            value = self.space.value_code(self.query, j, payload.value)
        except (MalformedSpecError, PclabError) as exc:
            raise ApiError(422, "invalid_correction", str(exc))
        displayed = self.space.answer(self.current, self.query, j)
        if value == displayed:
            raise ApiError(
                422,
                "not_a_correction",
                "the proposed value equals the displayed value",
            )
        if self.mode == "oracle":
            truth = self.space.answer(self.space.target, self.query, j)
            if displayed == truth:
                raise ApiError(
                    422,
                    "component_already_correct",
                    f"component {j} already shows the target's value",
                )
            if value != truth:
                raise ApiError(
                    422,
                    "wrong_value",
                    f"component {j} is indeed wrong, but the corrected value "
                    "does not match the target",
                )
        else:
            conflict = self.transcript.conflict_with(self.query, j, value)
            if conflict is not None:
                token = self.space.value_token(self.query, j, conflict)
                raise ApiError(
                    422,
                    "inconsistent_feedback",
                    f"earlier feedback fixed component {j} of query {self.query} "
                    f"to {token!r}",
                )
        rec = correct_record(self.step + 1, self.query, j, value)
        self.transcript.append(rec)
        self.mask &= self.space.correction_elimination(self.query, j, value)
        self.streak = 0

    # -- rendering -------------------------------------------------------------

    def _query_payload(self):
        space, q = self.space, self.query
        displayed = space.evaluate(self.current, q)
        if space.kind == "triplet":
            names = space.meta["names"]
            leaves = [names[i] for i in space.meta["queries"][q]]
            tree = trees.restrict(space.meta["trees"][self.current], space.meta["queries"][q])
            triplets = [
                {
                    "index": ci,
                    "leaves": [names[i] for i in trip],
                    "displayed": space.value_token(q, ci, displayed[ci]),
                    "options": [trees.triplet_token(trip, code, names) for code in range(3)],
                }
                for ci, trip in enumerate(space.meta["triples"][q])
            ]
            return {
                "kind": "triplet",
                "leaves": leaves,
                "subtree": trees.newick(tree, names),
                "triplets": triplets,
            }
        if space.has_component_values():
            points = space.component_values[q]
            return {
                "kind": "threshold",
                "points": [
                    {"index": j, "x": float(points[j]), "label": int(displayed[j])}
                    for j in range(space.c)
                ],
            }
        return {
            "kind": "labels",
            "labels": [
                {"index": j, "label": int(displayed[j])} for j in range(space.c)
            ],
        }

    def view(self):
        out = {
            "id": self.id,
            "mode": self.mode,
            "step": self.step,
            "terminated": self.terminated,
            "space": self.space.describe() if self.mode == "oracle" else {
                "kind": self.space.kind,
                "n_hypotheses": self.space.n_hypotheses,
                "n_queries": self.space.n_queries,
                "c": self.space.c,
            },
            "version_space_size": int(self.mask.sum()),
            "history": self.history,
        }
        if self.mode == "oracle":
            out["err"] = self.space.err(self.current)
            out["err_c"] = self.space.err_c(self.current)
        if self.terminated:
            out["final_hypothesis"] = {
                "id": self.current,
                "label": self.space.hypothesis_label(self.current),
            }
        else:
            out["query"] = {
                "id": self.query,
                **self._query_payload(),
            }
            out["displayed"] = [
                self.space.value_token(self.query, j, v)
                for j, v in enumerate(self.space.evaluate(self.current, self.query))
            ]
        return out


def create_app(seed=0, ui_dir=None):
    app = FastAPI(title="pclab session service")
    sessions = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.error, "detail": exc.detail}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"error": "invalid_request", "detail": str(exc)}
        )

    def get_session(session_id):
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    @app.get("/api/spaces")
    async def list_spaces():
        return {"spaces": SPACE_CATALOG}

    @app.post("/api/sessions", status_code=201)
    async def create_session(config: CreateSessionRequest):
        session = Session(config, default_seed=seed)
        with registry_lock:
            sessions[session.id] = session
        return {"id": session.id, "view": session.view()}

    @app.get("/api/sessions/{session_id}")
    async def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.view()

    @app.post("/api/sessions/{session_id}/feedback")
    async def submit_feedback(session_id: str, payload: FeedbackRequest):
        session = get_session(session_id)
        with session.lock:
            session.apply(payload)
            return session.view()

    @app.get("/api/sessions/{session_id}/transcript")
    async def export_transcript(session_id: str):
        session = get_session(session_id)
        with session.lock:
            text = transcript_to_jsonl(session.space, session.transcript)
        return PlainTextResponse(text, media_type="application/jsonl")

    static_dir = Path(ui_dir) if ui_dir else _default_ui_dir()
    if static_dir is not None and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _default_ui_dir():
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None
