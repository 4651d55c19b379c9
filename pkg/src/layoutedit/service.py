"""HTTP service: designs, relation graphs, editing sessions with undo/redo,
corpus evaluation jobs, and instruction translation.

Single-process server with file-backed persistence. Per-session edits are
serialized behind a lock and applied atomically: a failing backend call
leaves the session untouched. Evaluation runs in a small background pool and
is pollable. Designs are stored under content-hash ids, so POSTing the same
document twice yields the same id.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import backends as be
from .errors import LayoutEditError
from .metrics import EvalCase, evaluate_corpus
from .model import (
    Design,
    ElementContent,
    GeometricAttrs,
    TextAttrs,
    design_to_document,
    emit_design,
    parse_design,
)
from .ops import ADD, derive_seed, parse_operation, print_operation
from .relations import build_relation_graph, graph_to_records, remove_node_edges, serialize_graph
from .solver import NewElementSpec, SolverConfig
from .store import FileStore, content_id

DEFAULT_ALPHA = 0.1


class ApiError(LayoutEditError):
    def __init__(self, status: int, code: str, message: str, path: str = "$"):
        self.status = status
        self.code = code
        self.message = message
        self.path = path
        super().__init__(message)


class SessionRequest(BaseModel):
    design_id: str
    backend: str = be.SOLVER
    alpha: float = DEFAULT_ALPHA


class NewElementBody(BaseModel):
    modality: str
    content: Optional[str] = None
    asset: Optional[str] = None
    width: Optional[float] = None
    height: Optional[float] = None
    x: Optional[float] = None
    y: Optional[float] = None
    font_size: Optional[float] = None
    text_align: str = "left"
    angle: float = 0.0


class EditRequest(BaseModel):
    op: Optional[str] = None
    instruction: Optional[str] = None
    backend: Optional[str] = None
    new_element: Optional[NewElementBody] = None


class TranslateRequest(BaseModel):
    instruction: str


class EvalRequest(BaseModel):
    cases: str
    backend: str = be.SOLVER
    alpha: float = DEFAULT_ALPHA
    tol_px: float = 1.0
    seed: int = 0


def _new_element_spec(body: NewElementBody | None) -> NewElementSpec | None:
    if body is None:
        return None
    payload = body.content if body.modality == "text" else (body.asset or body.content)
    if not payload:
        raise ApiError(400, "bad_request", "new element needs content/asset", "$.new_element")
    content = ElementContent(modality=body.modality, payload=payload)
    text_attrs = None
    if body.modality == "text":
        text_attrs = TextAttrs(
            font_size=body.font_size or 24.0, text_align=body.text_align, angle=body.angle
        )
    geom = None
    if body.x is not None and body.y is not None and body.width and body.height:
        geom = GeometricAttrs(cx=body.x, cy=body.y, w=body.width, h=body.height)
    size_hint = (body.width, body.height) if body.width and body.height else None
    return NewElementSpec(content=content, text_attrs=text_attrs, size_hint=size_hint, geom=geom)


class ServiceState:
    def __init__(self, store_dir: str | Path, chat_client: be.ChatClient | None = None,
                 solver_cfg: SolverConfig | None = None):
        self.store = FileStore(store_dir)
        self.chat_client = chat_client
        self.solver_cfg = solver_cfg or SolverConfig()
        self.locks: dict[str, threading.Lock] = {}
        self.locks_guard = threading.Lock()
        self.pool = ThreadPoolExecutor(max_workers=2)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self.locks_guard:
            return self.locks.setdefault(session_id, threading.Lock())

    def backend_for(self, kind: str):
        if kind == be.SOLVER:
            return be.SolverBackend(cfg=self.solver_cfg)
        if kind == be.EXTERNAL_MODEL:
            if self.chat_client is None:
                raise ApiError(400, "no_model", "no external model client is configured")
            return be.ExternalModelBackend(client=self.chat_client, cfg=self.solver_cfg)
        raise ApiError(400, "bad_backend", f"unknown backend {kind!r}")


def _session_state(session_id: str, rec: dict, include_design: bool = True) -> dict:
    cursor = rec["cursor"]
    current = rec["history"][cursor - 1]["design"] if cursor else rec["original"]
    state: dict[str, Any] = {
        "id": session_id,
        "design_id": rec["design_id"],
        "alpha": rec["alpha"],
        "backend": rec["backend"],
        "cursor": cursor,
        "history_length": len(rec["history"]),
    }
    if include_design:
        state["design"] = current
    if cursor:
        entry = rec["history"][cursor - 1]
        state["last"] = {"operation": entry["operation"], "diagnostics": entry["diagnostics"]}
    else:
        state["last"] = None
    return state


def create_app(
    store_dir: str | Path,
    chat_client: be.ChatClient | None = None,
    solver_cfg: SolverConfig | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(store_dir, chat_client, solver_cfg)
    app = FastAPI(title="layoutedit service")
    app.state.svc = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "path": exc.path},
        )

    @app.exception_handler(LayoutEditError)
    async def _domain_error(_req: Request, exc: LayoutEditError):
        return JSONResponse(
            status_code=400,
            content={"code": "domain_error", "message": str(exc), "path": "$"},
        )

    def load_design(design_id: str) -> Design:
        doc = state.store.get("designs", design_id)
        if doc is None:
            raise ApiError(404, "not_found", f"design {design_id} not found", "$.design_id")
        return parse_design(json.dumps(doc))

    def load_session(session_id: str) -> dict:
        rec = state.store.get("sessions", session_id)
        if rec is None:
            raise ApiError(404, "not_found", f"session {session_id} not found", "$.session")
        return rec

    # --- designs -------------------------------------------------------------

    @app.post("/designs")
    def create_design(document: dict):
        try:
            design = parse_design(json.dumps(document))
        except LayoutEditError as exc:
            path = getattr(exc, "path", "$")
            raise ApiError(400, "invalid_design", str(exc), path) from exc
        canonical = emit_design(design)
        design_id = content_id(canonical)
        if not state.store.exists("designs", design_id):
            state.store.put("designs", design_id, design_to_document(design))
        return {"id": design_id}

    @app.get("/designs/{design_id}")
    def get_design(design_id: str):
        doc = state.store.get("designs", design_id)
        if doc is None:
            raise ApiError(404, "not_found", f"design {design_id} not found")
        return doc

    @app.post("/designs/{design_id}/graph")
    def design_graph(design_id: str, alpha: float = DEFAULT_ALPHA, seed: int = 0):
        design = load_design(design_id)
        graph = build_relation_graph(design, alpha, seed=seed)
        return {
            "alpha": alpha,
            "seed": seed,
            "nodes": [n for n in sorted(graph.element_ids)] + ["canvas"],
            "edges": graph_to_records(graph),
            "blocks": serialize_graph(graph),
        }

    # --- sessions ------------------------------------------------------------

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        design = load_design(req.design_id)
        state.backend_for(req.backend)  # validate
        session_id = uuid.uuid4().hex[:12]
        rec = {
            "design_id": req.design_id,
            "alpha": req.alpha,
            "backend": req.backend,
            "original": design_to_document(design),
            "history": [],
            "cursor": 0,
        }
        state.store.put("sessions", session_id, rec)
        return _session_state(session_id, rec)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_state(session_id, load_session(session_id))

    @app.post("/sessions/{session_id}/edits")
    def apply_edit(session_id: str, req: EditRequest):
        with state.session_lock(session_id):
            rec = load_session(session_id)
            current = parse_design(
                json.dumps(rec["history"][rec["cursor"] - 1]["design"] if rec["cursor"] else rec["original"])
            )
            backend = state.backend_for(req.backend or rec["backend"])

            if req.op is not None:
                try:
                    steps = [parse_operation(req.op)]
                except LayoutEditError as exc:
                    raise ApiError(400, "bad_operation", str(exc), "$.op") from exc
            elif req.instruction is not None:
                if state.chat_client is None:
                    raise ApiError(400, "no_model", "no translation client is configured")
                steps = be.translate_instruction(req.instruction, current, state.chat_client)
            else:
                raise ApiError(400, "bad_request", "provide 'op' or 'instruction'", "$")

            spec = _new_element_spec(req.new_element)
            new_elements = {}
            for pos, step in enumerate(steps):
                if step.action == ADD:
                    if spec is None:
                        raise ApiError(400, "bad_request", "add requires new_element", "$.new_element")
                    new_elements[pos] = spec

            seed = derive_seed(session_id, rec["cursor"])
            edited, diags = be.run_composite(
                backend, current, steps, rec["alpha"], seed, new_elements=new_elements
            )

            entry = {
                "operation": [print_operation(s) for s in steps],
                "design": design_to_document(edited),
                "diagnostics": {
                    "steps": [d.to_dict() for d in diags],
                    "size_rel": min(d.size_rel for d in diags),
                    "pos_rel": min(d.pos_rel for d in diags),
                    "op": min(d.op_satisfied for d in diags),
                },
            }
            rec["history"] = rec["history"][: rec["cursor"]] + [entry]
            rec["cursor"] += 1
            state.store.put("sessions", session_id, rec)
            return _session_state(session_id, rec)

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        with state.session_lock(session_id):
            rec = load_session(session_id)
            if rec["cursor"] <= 0:
                raise ApiError(409, "at_boundary", "nothing to undo")
            rec["cursor"] -= 1
            state.store.put("sessions", session_id, rec)
            return _session_state(session_id, rec)

    @app.post("/sessions/{session_id}/redo")
    def redo(session_id: str):
        with state.session_lock(session_id):
            rec = load_session(session_id)
            if rec["cursor"] >= len(rec["history"]):
                raise ApiError(409, "at_boundary", "nothing to redo")
            rec["cursor"] += 1
            state.store.put("sessions", session_id, rec)
            return _session_state(session_id, rec)

    @app.post("/sessions/{session_id}/translate")
    def translate(session_id: str, req: TranslateRequest):
        rec = load_session(session_id)
        if state.chat_client is None:
            raise ApiError(400, "no_model", "no translation client is configured")
        current = parse_design(
            json.dumps(rec["history"][rec["cursor"] - 1]["design"] if rec["cursor"] else rec["original"])
        )
        ops = be.translate_instruction(req.instruction, current, state.chat_client)
        return {"operations": [print_operation(op) for op in ops]}

    # --- evaluation ----------------------------------------------------------

    def _run_eval(job_id: str, req: EvalRequest) -> None:
        def update(payload: dict) -> None:
            state.store.put("reports", job_id, payload)

        try:
            lines = Path(req.cases).read_text(encoding="utf-8").splitlines()
            cases_in = [json.loads(ln) for ln in lines if ln.strip()]
            backend = state.backend_for(req.backend)
            total = len(cases_in)
            update({"status": "running", "processed": 0, "total": total})

            results: list[EvalCase] = []
            errors = 0
            for idx, raw in enumerate(cases_in):
                try:
                    design = parse_design(json.dumps(raw["design"]))
                    op = parse_operation(raw["op"])
                    graph = build_relation_graph(
                        design, req.alpha, seed=derive_seed(req.seed, idx)
                    )
                    if op.target in graph.nodes:
                        graph = remove_node_edges(graph, op.target)
                    spec = _new_element_spec(
                        NewElementBody(**raw["new_element"]) if raw.get("new_element") else None
                    )
                    edited, _diag = be.edit_via_backend(backend, design, graph, op, new_element=spec)
                    results.append(EvalCase(design, graph, op, edited))
                except Exception:
                    errors += 1
                if (idx + 1) % 10 == 0:
                    update({"status": "running", "processed": idx + 1, "total": total})

            report = evaluate_corpus(results, req.alpha, req.tol_px)
            report.n_errors += errors
            update(
                {
                    "status": "done",
                    "processed": total,
                    "total": total,
                    "report": report.to_dict(),
                    "table": report.to_table(),
                }
            )
        except Exception as exc:  # job-level failure
            update({"status": "failed", "error": str(exc)})

    @app.post("/eval")
    def start_eval(req: EvalRequest):
        if not Path(req.cases).is_file():
            raise ApiError(400, "bad_request", f"cases file {req.cases!r} not readable", "$.cases")
        job_id = uuid.uuid4().hex[:12]
        state.store.put("reports", job_id, {"status": "queued", "processed": 0, "total": 0})
        state.pool.submit(_run_eval, job_id, req)
        return {"job": job_id}

    @app.get("/eval/{job_id}")
    def eval_status(job_id: str):
        rec = state.store.get("reports", job_id)
        if rec is None:
            raise ApiError(404, "not_found", f"evaluation job {job_id} not found")
        return rec

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
