"""HTTP session service.

Each session holds one policy under exploration: a simulation state, a
derivation tree of every step taken (event injections and rule
applications alike), and a cursor into that tree.  Graphs are immutable
snapshots, so keeping the whole tree is cheap and any intermediate
state can be rendered.

Endpoints::

    POST   /sessions                     create from a policy document
    GET    /sessions                     list ids
    GET    /sessions/{id}/graph          rendered graph (view=, at=)
    GET    /sessions/{id}/relations      extracted relations
    GET    /sessions/{id}/derivation     tree outline
    POST   /sessions/{id}/events         inject one event or several
    POST   /sessions/{id}/strategy       run a strategy script
    GET    /sessions/{id}/decide         p=, a=, r=
    GET    /sessions/{id}/duties         principal=, state=
    POST   /sessions/{id}/fork           what-if branch (optional {"at": n})
    DELETE /sessions/{id}

Errors: 400 for malformed input or unknown names, 404 for unknown
sessions, 409 when a policy fails validation or an event conflicts with
the recorded history.  `POST /sessions` accepts either a bare policy
document or ``{"policy": ..., "fresh_history": true}``; the fresh mode
strips the file's recorded events so duties can be walked through from
the start, while the default keeps the graph exactly as loaded and
tracks duties for events injected from now on.

With a state directory configured, sessions are snapshotted to JSON on
shutdown and rebuilt on start by replaying their injected events
(strategy-created auxiliary edges are recomputable and not persisted).
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .obligations import DutyDelta, SimulationState, TimeRegression
from .policy import PolicyError, UnknownEntity, decide, extract_policy, validate
from .rules import builtin_rules
from .strategy import DerivationTree, LocatedGraph, StrategyError, run_strategy
from .workspace import (
    ParseError,
    event_fields,
    export_view,
    policy_from_doc,
    query_duties,
)

MAX_STRATEGY_BUDGET = 100_000


@dataclass
class Session:
    id: str
    tree: DerivationTree
    states: list[SimulationState]
    current: int
    created: float
    mode: str  # "resume" | "fresh"
    policy_doc: dict  # as received, for snapshots
    baseline: list[dict] = field(default_factory=list)  # events folded into the root
    lock: threading.Lock = field(default_factory=threading.Lock)

    def state_at(self, node: int) -> SimulationState:
        if not 0 <= node < len(self.states):
            raise HTTPException(400, f"no derivation node {node}")
        return self.states[node]


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(400, str(exc))


def _new_session(doc: dict, fresh: bool) -> Session:
    try:
        graph = policy_from_doc(doc)
    except ParseError as exc:
        raise _bad_request(exc) from exc
    violations = validate(graph)
    if violations:
        raise HTTPException(409, detail={
            "error": "policy is not well-formed",
            "violations": [
                {"code": v.code, "message": v.message} for v in violations
            ],
        })
    state = SimulationState.fresh(graph) if fresh else SimulationState.resume(graph)
    tree = DerivationTree(LocatedGraph.whole(state.graph))
    return Session(
        id=uuid.uuid4().hex[:12],
        tree=tree,
        states=[state],
        current=0,
        created=time.time(),
        mode="fresh" if fresh else "resume",
        policy_doc=doc,
    )


def _delta_json(delta: DutyDelta, state: SimulationState) -> dict:
    by_tuple = {s.record.current_tuple(): s for s in state.duty_states()}

    def rows(records):
        return [by_tuple[r.current_tuple()].to_json_dict() for r in records]

    return {"created": rows(delta.created), "closed": rows(delta.closed)}


def _tree_json(session: Session) -> dict:
    return {
        "current": session.current,
        "nodes": [
            {"node": i, "events": len(session.states[i].history()),
             "duties": len(session.states[i].duties)}
            for i in range(len(session.tree))
        ],
        "steps": [
            {"parent": s.parent, "child": s.child, "kind": s.kind, "label": s.label}
            for s in session.tree.steps
        ],
    }


def _injections_up_to(session: Session, node: int) -> list[dict]:
    """All event payloads behind a derivation node, baseline included."""
    own = [
        json.loads(s.label)
        for s in session.tree.steps
        if s.kind == "event" and s.child <= node
    ]
    return [dict(f) for f in session.baseline] + own


def build_app(state_dir: str | None = None) -> FastAPI:
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    snap_path = Path(state_dir) / "sessions.json" if state_dir is not None else None

    def load_snapshots() -> None:
        if snap_path is None or not snap_path.exists():
            return
        try:
            stored = json.loads(snap_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return
        for row in stored.get("sessions", []):
            # a row that no longer replays cleanly is dropped, not fatal
            try:
                session = _new_session(row["policy"], row["mode"] == "fresh")
                state = session.states[0]
                for fields in row.get("injected", []):
                    state, _ = state.inject(fields)
                session.id = row["id"]
                session.created = row["created"]
                session.baseline = [dict(f) for f in row.get("injected", [])]
                session.states = [state]
                session.tree = DerivationTree(LocatedGraph.whole(state.graph))
            except Exception:
                continue
            with registry_lock:
                sessions[session.id] = session

    def write_snapshots() -> None:
        if snap_path is None:
            return
        snap_path.parent.mkdir(parents=True, exist_ok=True)
        with registry_lock:
            rows = [
                {"id": s.id, "created": s.created, "mode": s.mode,
                 "policy": s.policy_doc,
                 "injected": _injections_up_to(s, s.current)}
                for s in sessions.values()
            ]
        snap_path.write_text(
            json.dumps({"sessions": rows}, ensure_ascii=False),
            encoding="utf-8")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        load_snapshots()
        yield
        write_snapshots()

    app = FastAPI(title="category-based policy workbench", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request,
                                exc: RequestValidationError) -> JSONResponse:
        # missing or mistyped parameters are the caller's mistake: 400
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def get_session(sid: str) -> Session:
        try:
            return sessions[sid]
        except KeyError:
            raise HTTPException(404, f"no session {sid}") from None

    async def read_json(request: Request) -> object:
        body = await request.body()
        if not body:
            return None
        try:
            return json.loads(body)
        except json.JSONDecodeError as exc:
            raise _bad_request(exc) from exc

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request) -> dict:
        payload = await read_json(request)
        if not isinstance(payload, dict):
            raise HTTPException(400, "the body must be a policy document")
        if set(payload) <= {"policy", "fresh_history"} and "policy" in payload:
            doc, fresh = payload["policy"], bool(payload.get("fresh_history"))
        else:
            doc, fresh = payload, False
        if not isinstance(doc, dict):
            raise HTTPException(400, "the policy must be an object")
        session = _new_session(doc, fresh)
        with registry_lock:
            sessions[session.id] = session
        return {"id": session.id, "mode": session.mode,
                "nodes": len(session.states[0].policy_view().graph.nodes)}

    @app.get("/sessions")
    def list_sessions() -> dict:
        with registry_lock:
            rows = [
                {"id": s.id, "created": s.created, "mode": s.mode,
                 "steps": len(s.tree.steps)}
                for s in sessions.values()
            ]
        return {"sessions": sorted(rows, key=lambda r: r["created"])}

    @app.get("/sessions/{sid}/graph")
    def get_graph(sid: str, view: str = Query("default"),
                  at: int | None = Query(None)) -> dict:
        session = get_session(sid)
        with session.lock:
            node = session.current if at is None else at
            state = session.state_at(node)
        if view not in ("default", "full"):
            raise HTTPException(400, f"unknown view {view!r}")
        doc = export_view(state.graph, include_aux=(view == "full"))
        doc["at"] = node
        return doc

    @app.get("/sessions/{sid}/relations")
    def get_relations(sid: str, at: int | None = Query(None)) -> dict:
        session = get_session(sid)
        with session.lock:
            state = session.state_at(session.current if at is None else at)
        return extract_policy(state.graph).to_json_dict()

    @app.get("/sessions/{sid}/derivation")
    def get_derivation(sid: str) -> dict:
        session = get_session(sid)
        with session.lock:
            return _tree_json(session)

    @app.post("/sessions/{sid}/events")
    async def post_events(sid: str, request: Request) -> dict:
        session = get_session(sid)
        payload = await read_json(request)
        if isinstance(payload, dict) and set(payload) == {"events"}:
            batch = payload["events"]
        elif isinstance(payload, dict):
            batch = [payload]
        else:
            batch = payload
        if (not isinstance(batch, list) or not batch
                or not all(isinstance(f, dict) for f in batch)):
            raise HTTPException(400, "the body must be an event or a list of events")
        created: list[dict] = []
        closed: list[dict] = []
        with session.lock:
            state = session.states[session.current]
            staged = []
            for fields in batch:
                try:
                    state, delta = state.inject(event_fields(fields))
                except TimeRegression as exc:
                    raise HTTPException(409, str(exc)) from exc
                except (ParseError, UnknownEntity) as exc:
                    raise _bad_request(exc) from exc
                except PolicyError as exc:
                    raise HTTPException(409, str(exc)) from exc
                staged.append((fields, state, delta))
            # every event is fine: commit the batch as one chain of steps
            for fields, st, delta in staged:
                node = session.tree.add(
                    session.current, LocatedGraph.whole(st.graph),
                    "event", json.dumps(fields, sort_keys=True, ensure_ascii=False))
                session.states.append(st)
                session.current = node
                rows = _delta_json(delta, st)
                created += rows["created"]
                closed += rows["closed"]
            return {
                "created": created,
                "closed": closed,
                "duties": [s.to_json_dict() for s in state.duty_states()],
                "at": session.current,
            }

    @app.post("/sessions/{sid}/strategy")
    async def post_strategy(sid: str, request: Request) -> dict:
        session = get_session(sid)
        payload = await read_json(request)
        if not isinstance(payload, dict) or "script" not in payload:
            raise HTTPException(400, 'the body must carry a "script"')
        script = payload["script"]
        seed = payload.get("seed")
        budget = payload.get("budget", 10_000)
        if not isinstance(script, str):
            raise HTTPException(400, "the script must be strategy text")
        if seed is not None and not isinstance(seed, int):
            raise HTTPException(400, "the seed must be an integer")
        if not isinstance(budget, int) or not 0 < budget <= MAX_STRATEGY_BUDGET:
            raise HTTPException(
                400, f"the budget must be between 1 and {MAX_STRATEGY_BUDGET}")
        with session.lock:
            state = session.states[session.current]
            try:
                result = run_strategy(
                    script, LocatedGraph.whole(state.graph), builtin_rules(),
                    budget=budget, seed=seed)
            except StrategyError as exc:
                raise HTTPException(409, str(exc)) from exc
            applied = []
            for step in result.steps:
                node = session.tree.add(
                    session.current, step.state, "rule", step.rule)
                session.states.append(
                    SimulationState(step.state.graph, state.duties))
                session.current = node
                applied.append(
                    {"node": node, "rule": step.rule, "match": step.match})
            return {"steps": applied, "at": session.current}

    @app.get("/sessions/{sid}/decide")
    def get_decide(sid: str, p: str, a: str, r: str) -> dict:
        session = get_session(sid)
        with session.lock:
            state = session.states[session.current]
        try:
            return decide(state.graph, p, a, r).to_json_dict()
        except UnknownEntity as exc:
            raise _bad_request(exc) from exc

    @app.get("/sessions/{sid}/duties")
    def get_duties(sid: str, principal: str | None = None,
                   state: str | None = None) -> dict:
        session = get_session(sid)
        if state is not None and state not in ("pending", "fulfilled", "violated"):
            raise HTTPException(400, f"unknown duty state {state!r}")
        with session.lock:
            current = session.states[session.current]
        return {"duties": list(query_duties(current, principal=principal,
                                            status=state))}

    @app.post("/sessions/{sid}/fork", status_code=201)
    async def fork_session(sid: str, request: Request) -> dict:
        session = get_session(sid)
        payload = await read_json(request)
        at = None
        if payload is not None:
            if not isinstance(payload, dict) or set(payload) - {"at"}:
                raise HTTPException(400, 'the body may only carry "at"')
            at = payload.get("at")
            if at is not None and not isinstance(at, int):
                raise HTTPException(400, "at must be a derivation node number")
        with session.lock:
            node = session.current if at is None else at
            state = session.state_at(node)
            baseline = _injections_up_to(session, node)
        branch = Session(
            id=uuid.uuid4().hex[:12],
            tree=DerivationTree(LocatedGraph.whole(state.graph)),
            states=[state],
            current=0,
            created=time.time(),
            mode=session.mode,
            policy_doc=session.policy_doc,
            baseline=baseline,
        )
        with registry_lock:
            sessions[branch.id] = branch
        return {"id": branch.id, "forked_from": sid}

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str) -> Response:
        with registry_lock:
            if sid not in sessions:
                raise HTTPException(404, f"no session {sid}")
            del sessions[sid]
        return Response(status_code=204)

    ui_dir = Path(__file__).resolve().parent / "ui"
    if ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
