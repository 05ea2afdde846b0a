"""HTTP JSON API over the composition engine.

Endpoints mirror the library surface: registry upload, composition with QoS
ranking, similarity, and session-scoped refinement with a select step that
commits a candidate as the session's current workflow.  Sessions and
registries are persisted one JSON document per entity under the store path.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import qos as qos_mod
from . import replanner
from .planner import (CompositionProblem, InvalidProblemError, NoPlanError,
                      PlanningError, TimeBudgetExceeded, compose_workflows)
from .registry import Registry, RegistryError
from .similarity import (EdgeSimWeights, NodeSimWeights, SimilarityError,
                         WorkflowSimWeights, sim_workflows)
from .workflow import Workflow, WorkflowError, validate_workflow

STORE_VERSION = 1


class StoreError(Exception):
    pass


@dataclass
class Session:
    id: str
    registry_id: str
    current: dict  # workflow document
    history: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"id": self.id, "registry_id": self.registry_id,
                "current": self.current, "history": list(self.history)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Session":
        return cls(id=doc["id"], registry_id=doc["registry_id"],
                   current=doc["current"], history=list(doc.get("history", [])))


class FileStore:
    """One JSON file per session/registry; versioned, loaded eagerly."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        (self.root / "registries").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self.sessions: dict[str, Session] = {}
        self.registries: dict[str, Registry] = {}
        self._registry_docs: dict[str, dict] = {}
        self._load()

    def _load(self):
        for path in sorted((self.root / "registries").glob("*.json")):
            wrapped = json.loads(path.read_text())
            self._check_version(wrapped, path)
            doc = wrapped["registry"]
            rid = path.stem
            self.registries[rid] = Registry.from_dict(doc)
            self._registry_docs[rid] = doc
        for path in sorted((self.root / "sessions").glob("*.json")):
            wrapped = json.loads(path.read_text())
            self._check_version(wrapped, path)
            session = Session.from_dict(wrapped["session"])
            self.sessions[session.id] = session

    @staticmethod
    def _check_version(wrapped: dict, path: Path):
        version = wrapped.get("version")
        if version != STORE_VERSION:
            raise StoreError(f"{path}: unsupported store version {version!r} "
                             f"(expected {STORE_VERSION})")

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def put_registry(self, doc: dict) -> str:
        registry = Registry.from_dict(doc)  # validate before persisting
        canonical = json.dumps(registry.to_dict(), sort_keys=True)
        rid = hashlib.sha256(canonical.encode()).hexdigest()[:12]
        with self._lock:
            self.registries[rid] = registry
            self._registry_docs[rid] = doc
        path = self.root / "registries" / f"{rid}.json"
        path.write_text(json.dumps({"version": STORE_VERSION, "registry": doc}))
        return rid

    def save_session(self, session: Session):
        path = self.root / "sessions" / f"{session.id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"version": STORE_VERSION,
                                   "session": session.to_dict()}))
        tmp.replace(path)


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message, **extra})


def _parse_ranking(body: dict):
    spec = body.get("ranking") or {}
    av_mode = spec.get("av_mode", "min")
    raw = bool(spec.get("raw", False))
    if "order" in spec:
        order = qos_mod.PreferenceOrder(tuple(spec["order"]))
        return ("lex", order, av_mode, raw)
    w = spec.get("weights") or {}
    weights = qos_mod.QoSWeights(
        w_rt=w.get("rt", 0.25), w_tp=w.get("tp", 0.25),
        w_av=w.get("av", 0.25), w_re=w.get("re", 0.25))
    return ("weighted", weights, av_mode, raw)


def create_app(store_path: str | Path | None = None,
               time_budget: float | None = None) -> FastAPI:
    store_path = store_path or os.environ.get("WFENGINE_STORE", "./wfengine_store")
    if time_budget is None:
        env = os.environ.get("WFENGINE_TIME_BUDGET")
        time_budget = float(env) if env else 30.0
    store = FileStore(store_path)
    app = FastAPI(title="wfengine")

    def resolve_registry(body: dict) -> tuple[str, Registry]:
        ref = body.get("registry")
        if isinstance(ref, str):
            if ref not in store.registries:
                raise LookupError(ref)
            return ref, store.registries[ref]
        if isinstance(ref, dict):
            rid = store.put_registry(ref)
            return rid, store.registries[rid]
        raise ValueError("body must carry 'registry' as an id or inline document")

    async def read_json(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ValueError("request body is not valid JSON")
        if not isinstance(body, dict):
            raise ValueError("request body must be a JSON object")
        return body

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(store.sessions)}

    @app.post("/registries")
    async def post_registry(request: Request):
        try:
            body = await read_json(request)
            rid = store.put_registry(body)
        except (ValueError, RegistryError) as e:
            return _error(400, "bad_registry", str(e))
        return {"id": rid}

    @app.post("/compose")
    async def post_compose(request: Request):
        try:
            body = await read_json(request)
            rid, registry = resolve_registry(body)
            problem = CompositionProblem.from_dict(body.get("problem") or {})
            problem.validate(registry)
            ranking = _parse_ranking(body)
            exhaustive = bool(body.get("exhaustive", False))
        except LookupError as e:
            return _error(404, "unknown_registry", f"unknown registry {e}")
        except (ValueError, InvalidProblemError, RegistryError, qos_mod.QosError) as e:
            return _error(400, "bad_request", str(e))
        deadline = time.monotonic() + time_budget
        try:
            candidates = compose_workflows(registry, problem,
                                           exhaustive=exhaustive, deadline=deadline)
        except TimeBudgetExceeded:
            return _error(422, "time_budget", "time budget exceeded", partial=True)
        except NoPlanError as e:
            return _error(422, "no_plan", str(e))

        kind = ranking[0]
        if kind == "lex":
            ranked = qos_mod.rank_lexicographic(candidates, registry, ranking[1],
                                                av_mode=ranking[2])
            out = [{"workflow": wf.to_dict(), "qos": agg.to_dict()}
                   for wf, agg in ranked]
        else:
            ranked = qos_mod.rank_weighted(candidates, registry, ranking[1],
                                           av_mode=ranking[2], raw=ranking[3])
            out = [{"workflow": wf.to_dict(), "qos": agg.to_dict(), "score": score}
                   for wf, agg, score in ranked]
        response = {"registry_id": rid, "candidates": out}
        if body.get("session"):
            sid = hashlib.sha256(os.urandom(16)).hexdigest()[:16]
            top = out[0]["workflow"]
            session = Session(id=sid, registry_id=rid, current=top)
            store.sessions[sid] = session
            store.save_session(session)
            response["session_id"] = sid
        return response

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"unknown session {session_id!r}")
        return session.to_dict()

    @app.post("/sessions/{session_id}/refine")
    async def post_refine(request: Request, session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"unknown session {session_id!r}")
        try:
            body = await read_json(request)
            requests = replanner.requests_from_list(body.get("requests", []))
            mode = body.get("mode", "exact")
            horizon = body.get("horizon")
        except (ValueError, replanner.RefinementError) as e:
            return _error(400, "bad_request", str(e))
        with store.session_lock(session_id):
            registry = store.registries[session.registry_id]
            original = Workflow.from_dict(session.current)
            deadline = time.monotonic() + time_budget
            try:
                result = replanner.refine(registry, original, requests,
                                          mode=mode, horizon=horizon,
                                          deadline=deadline)
            except TimeBudgetExceeded:
                return _error(422, "time_budget", "time budget exceeded", partial=True)
            except replanner.UnknownTargetError as e:
                return _error(400, "unknown_target", str(e))
            except (replanner.NoCandidateError, PlanningError) as e:
                return _error(422, "no_candidate", str(e))
            except replanner.RefinementError as e:
                return _error(400, "bad_request", str(e))
        return result.to_dict()

    @app.post("/sessions/{session_id}/select")
    async def post_select(request: Request, session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"unknown session {session_id!r}")
        try:
            body = await read_json(request)
            wf = Workflow.from_dict(body["workflow"])
            requests_doc = body.get("requests", [])
        except (ValueError, KeyError, WorkflowError) as e:
            return _error(400, "bad_request", f"malformed select body: {e}")
        with store.session_lock(session_id):
            registry = store.registries[session.registry_id]
            report = validate_workflow(registry, wf)
            if not report.ok:
                return _error(422, "invalid_workflow",
                              "selected workflow fails validation",
                              violations=report.violations)
            session.history.append({
                "requests": requests_doc,
                "chosen": wf.to_dict(),
                "timestamp": time.time(),
            })
            session.current = wf.to_dict()
            store.save_session(session)
        return session.to_dict()

    @app.post("/similarity")
    async def post_similarity(request: Request):
        try:
            body = await read_json(request)
            _, registry = resolve_registry(body)
            wf_a = Workflow.from_dict(body["workflow_a"])
            wf_b = Workflow.from_dict(body["workflow_b"])
            w = body.get("weights") or {}
            weights = WorkflowSimWeights(
                w_no=w.get("node", 0.45), w_ed=w.get("edge", 0.35),
                w_to=w.get("topo", 0.2))
            nw = body.get("node_weights") or {}
            node_weights = NodeSimWeights(
                w_onto=nw.get("onto", 0.6), w_inp=nw.get("inp", 0.15),
                w_oup=nw.get("oup", 0.15), w_des=nw.get("des", 0.1))
            ew = body.get("edge_weights") or {}
            edge_weights = EdgeSimWeights(
                w_node=ew.get("node", 0.5), w_label=ew.get("label", 0.5))
        except LookupError as e:
            return _error(404, "unknown_registry", f"unknown registry {e}")
        except (ValueError, KeyError, WorkflowError, RegistryError,
                SimilarityError) as e:
            return _error(400, "bad_request", str(e))
        report = sim_workflows(wf_a, wf_b, registry, weights=weights,
                               node_weights=node_weights,
                               edge_weights=edge_weights)
        return report.to_dict()

    app.state.store = store
    return app
