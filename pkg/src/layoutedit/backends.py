"""Editor backends: the deterministic solver and an external chat-model client.

Both expose the same contract: (design, pruned graph, operation) in, edited
design plus diagnostics out, canvas untouched. The external path builds the
standard editing prompt, calls a chat-completion endpoint with bounded
retries, and reassembles a design from the returned attribute list. Canned
clients make the whole path testable offline.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Protocol

from .errors import BackendError, ModelOutputError, TranslationError
from .metrics import check_relations, op_satisfaction, original_id_view
from .model import (
    Design,
    Element,
    ElementContent,
    GeometricAttrs,
    TextAttrs,
    format_attribute_records,
    serialize_canvas,
    serialize_content_sequence,
)
from .ops import ADD, DELETE, EditOperation, derive_seed, parse_operation, print_operation
from .relations import (
    CANVAS_NODE,
    RelationGraph,
    build_relation_graph,
    remove_node_edges,
    serialize_graph,
)
from .solver import NewElementSpec, SolveResult, SolverConfig, residuals, solve

SOLVER = "solver"
EXTERNAL_MODEL = "external-model"

_EDITOR_PROMPT_HEADER = """You are an autonomous AI assistant who aids designers to perform design layout editing by predicting element attributes based on the canvas size, element content, element size relationships, element position relationships, and an editing operation.

Please ensure that the specified element relationships are satisfied in the output design. For example, "element 1 large element 2" denotes that element 1 should be larger than element 2, "element 1 top-left canvas" represents that element 1 should be placed at the top-left of the canvas.
Besides, the editing operation also should be taken into account.

For the image element, you need to predict the center-x, center-y, width, and height attributes. For the text element, you should additionally predict its angle, font size, and text align. Only respond in JSON format, no other information. Here is an example output:

[
{"index": 0, "x": 470, "y": 394, "width": 940, "height": 806},
{"index": 1, "x": 470, "y": 394, "width": 873, "height": 721},
{"index": 2, "x": 598, "y": 147, "width": 443, "height": 418},
{"index": 3, "x": 583, "y": 394, "width": 441, "height": 336, "angle": 0, "font_size": 70, "text_align": "left"}
]
"""

_TRANSLATION_PROMPT_HEADER = """You translate a designer's natural-language request into standardized layout editing operations.

Valid operation lines (one per line, nothing else):
move element <id> to {"x": <int>, "y": <int>}
resize element <id> to {"width": <int>, "height": <int>}
add element <id>
delete element <id>

Use the design summary below to pick target ids and concrete integer parameters. Respond with the operation line(s) only.
"""


class ChatClient(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass
class CannedClient:
    """Scripted client for offline tests; replays responses in order."""

    responses: list[str]
    calls: list[str] = field(default_factory=list)

    def complete(self, prompt: str) -> str:
        self.calls.append(prompt)
        if not self.responses:
            raise BackendError("canned client exhausted")
        index = min(len(self.calls) - 1, len(self.responses) - 1)
        return self.responses[index]

    @classmethod
    def from_fixture(cls, path: str) -> "CannedClient":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(responses=list(data["responses"]))


@dataclass
class HttpChatClient:
    """Minimal chat-completion client (OpenAI-style wire contract)."""

    endpoint: str
    model: str
    temperature: float = 0.0
    auth_env: str = "LAYOUTEDIT_API_TOKEN"
    timeout_s: float = 60.0

    @classmethod
    def from_file(cls, path: str) -> "HttpChatClient":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def complete(self, prompt: str) -> str:
        import httpx

        headers = {}
        token = os.environ.get(self.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        resp = httpx.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout_s)
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


@dataclass
class SolverBackend:
    cfg: SolverConfig = field(default_factory=SolverConfig)
    kind: str = SOLVER


@dataclass
class ExternalModelBackend:
    client: ChatClient
    retries: int = 3
    cfg: SolverConfig = field(default_factory=SolverConfig)  # for residual reports
    kind: str = EXTERNAL_MODEL


EditorBackend = object  # SolverBackend | ExternalModelBackend


@dataclass
class ModelExchange:
    prompt: str
    raw_response: str
    parsed: dict | None
    repair_log: list[str] = field(default_factory=list)
    error: str | None = None


@dataclass
class EditDiagnostics:
    backend: str
    op_satisfied: int
    size_rel: float
    pos_rel: float
    residuals: object
    id_map: dict
    exchanges: list[ModelExchange] = field(default_factory=list)
    attempts: int = 1
    violated_edges: tuple = ()

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "op": self.op_satisfied,
            "size_rel": self.size_rel,
            "pos_rel": self.pos_rel,
            "residuals": self.residuals.to_dict() if self.residuals else None,
            "attempts": self.attempts,
            "id_map": {str(k): v for k, v in self.id_map.items()},
        }


def build_prompt(
    d: Design,
    g: RelationGraph,
    op: EditOperation,
    add_content: ElementContent | None = None,
) -> str:
    """Standard editing prompt: instructions, example output, input blocks.

    Byte-stable for identical inputs. For an add at the next free id the new
    element's content is appended to the content block.
    """
    content_block = serialize_content_sequence(d)
    if add_content is not None and op.action == ADD and op.target == d.n:
        item = json.dumps(
            {"index": d.n, "content": add_content.prompt_token},
            separators=(", ", ": "),
            ensure_ascii=False,
        )
        if d.n:
            content_block = content_block[:-1] + ", " + item + "]"
        else:
            content_block = content_block[:-1] + item + "]"
    return (
        _EDITOR_PROMPT_HEADER
        + "\nInput:\n\n"
        + serialize_canvas(d.canvas)
        + "\n"
        + content_block
        + "\n"
        + serialize_graph(g)
        + "\nEDITING OPERATION: "
        + print_operation(op)
        + "\n\nOutput:\n"
    )


def _extract_first_list(text: str) -> list:
    decoder = json.JSONDecoder()
    for pos, ch in enumerate(text):
        if ch != "[":
            continue
        try:
            value, _ = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            continue
        if isinstance(value, list) and value and all(isinstance(r, dict) for r in value):
            return value
    raise ModelOutputError("no attribute list found in response", raw=text)


_NUMERIC_KEYS = ("x", "y", "width", "height", "angle", "font_size")


def _coerce_number(value, key: str, index, repairs: list[str]):
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            out = float(value)
        except ValueError:
            return None
        repairs.append(f"coerced {key} of element {index} from string")
        return out
    return None


def parse_model_output(
    text: str,
    expected: Design,
    op: EditOperation,
    add_content: ElementContent | None = None,
) -> tuple[dict[int, dict], list[str]]:
    """Extract and repair the attribute list from a model response.

    Coverage must equal the expected element ids, minus a delete target, plus
    an add target at the next free id. Repairs (logged): numeric strings are
    coerced, non-positive sizes clamped to 1, unknown keys dropped.
    """
    records = _extract_first_list(text)
    repairs: list[str] = []

    expected_ids = {el.id for el in expected.elements}
    if op.action == DELETE:
        expected_ids.discard(op.target)
    if op.action == ADD:
        expected_ids.add(op.target)

    def modality_is_text(idx: int) -> bool:
        if idx < expected.n:
            return expected.elements[idx].is_text
        return add_content is not None and add_content.modality == "text"

    out: dict[int, dict] = {}
    broken: list[int] = []
    for rec in records:
        idx = rec.get("index")
        if not isinstance(idx, int) or idx not in expected_ids or idx in out:
            continue
        parsed = {"index": idx}
        ok = True
        keys = ("x", "y", "width", "height")
        if modality_is_text(idx):
            keys += ("angle", "font_size")
        for key in keys:
            value = _coerce_number(rec.get(key), key, idx, repairs)
            if value is None:
                ok = False
                break
            parsed[key] = value
        if ok and modality_is_text(idx):
            align = rec.get("text_align")
            if align not in ("left", "center", "right"):
                ok = False
        if not ok:
            broken.append(idx)
            continue
        if modality_is_text(idx):
            parsed["text_align"] = rec["text_align"]
        for dim in ("width", "height"):
            if parsed[dim] < 1:
                repairs.append(f"clamped {dim} of element {idx} to 1")
                parsed[dim] = 1.0
        dropped = set(rec) - set(parsed)
        if dropped:
            repairs.append(f"dropped keys {sorted(dropped)} on element {idx}")
        out[idx] = parsed

    missing = sorted(set(expected_ids) - set(out)) + sorted(broken)
    if missing:
        raise ModelOutputError(
            f"response does not cover element(s) {sorted(set(missing))}",
            raw=text,
            missing=sorted(set(missing)),
        )
    return out, repairs


def assemble_design(
    records: dict[int, dict],
    expected: Design,
    op: EditOperation,
    add_content: ElementContent | None = None,
    add_text_attrs: TextAttrs | None = None,
) -> Design:
    """Rebuild a Design from attribute records in original-id order.

    Ids are renumbered compactly (a deleted element leaves a gap in the
    records). Content comes from the expected design, or the supplied add
    content for a fresh id.
    """
    elements = []
    for new_id, idx in enumerate(sorted(records)):
        rec = records[idx]
        if idx < expected.n:
            content = expected.elements[idx].content
            base_text = expected.elements[idx].text_attrs
        else:
            if add_content is None:
                raise ModelOutputError(f"no content available for element {idx}", raw="")
            content = add_content
            base_text = add_text_attrs
        geom = GeometricAttrs(cx=rec["x"], cy=rec["y"], w=rec["width"], h=rec["height"])
        text_attrs = None
        if content.modality == "text":
            text_attrs = TextAttrs(
                font_size=max(1.0, rec.get("font_size", base_text.font_size if base_text else 12.0)),
                text_align=rec.get("text_align", base_text.text_align if base_text else "left"),
                angle=rec.get("angle", base_text.angle if base_text else 0.0),
            )
        elements.append(Element(id=new_id, content=content, geom=geom, text_attrs=text_attrs))
    return Design(canvas=expected.canvas, elements=tuple(elements))


def _diagnose(
    backend_kind: str,
    d_in: Design,
    g: RelationGraph,
    op: EditOperation,
    edited: Design,
    cfg: SolverConfig,
    id_map: dict,
    exchanges: list[ModelExchange] | None = None,
    attempts: int = 1,
    res=None,
) -> EditDiagnostics:
    view = original_id_view(edited, op, d_in.n)
    deleted = {op.target} if op.action == DELETE else set()
    chk = check_relations(g, view, canvas=d_in.canvas, deleted=deleted)
    if res is None:
        res = residuals(edited, g, op, cfg, original=d_in)
    return EditDiagnostics(
        backend=backend_kind,
        op_satisfied=op_satisfaction(op, view),
        size_rel=chk.size_rel,
        pos_rel=chk.pos_rel,
        residuals=res,
        id_map=id_map,
        exchanges=exchanges or [],
        attempts=attempts,
        violated_edges=chk.violated,
    )


def edit_via_backend(
    backend,
    d: Design,
    g: RelationGraph,
    op: EditOperation,
    new_element: NewElementSpec | None = None,
) -> tuple[Design, EditDiagnostics]:
    """Dispatch one edit through a backend; canvas immutability is enforced."""
    if isinstance(backend, SolverBackend):
        result: SolveResult = solve(d, g, op, backend.cfg, new_element=new_element)
        edited = result.design
        diag = _diagnose(SOLVER, d, g, op, edited, backend.cfg, result.id_map, res=result.residuals)
    elif isinstance(backend, ExternalModelBackend):
        edited, diag = _edit_via_model(backend, d, g, op, new_element)
    else:
        raise BackendError(f"unknown backend {backend!r}")
    if edited.canvas != d.canvas:
        raise BackendError("backend altered the canvas")
    return edited, diag


def _edit_via_model(
    backend: ExternalModelBackend,
    d: Design,
    g: RelationGraph,
    op: EditOperation,
    new_element: NewElementSpec | None,
) -> tuple[Design, EditDiagnostics]:
    add_content = new_element.content if new_element else None
    add_text = new_element.text_attrs if new_element else None
    prompt = build_prompt(d, g, op, add_content=add_content)
    exchanges: list[ModelExchange] = []
    for attempt in range(1, backend.retries + 1):
        try:
            raw = backend.client.complete(prompt)
        except Exception as exc:  # endpoint/transport failure
            exchanges.append(ModelExchange(prompt, "", None, error=str(exc)))
            continue
        try:
            records, repairs = parse_model_output(raw, d, op, add_content=add_content)
            edited = assemble_design(records, d, op, add_content=add_content, add_text_attrs=add_text)
        except ModelOutputError as exc:
            exchanges.append(ModelExchange(prompt, raw, None, error=str(exc)))
            continue
        exchanges.append(ModelExchange(prompt, raw, records, repair_log=repairs))
        id_map = {idx: new for new, idx in enumerate(sorted(records))}
        diag = _diagnose(
            EXTERNAL_MODEL, d, g, op, edited, backend.cfg, id_map,
            exchanges=exchanges, attempts=attempt,
        )
        return edited, diag
    raise BackendError(
        f"external model failed after {backend.retries} attempt(s)", exchanges=exchanges
    )


def design_summary(d: Design) -> str:
    """Compact design description used as translation context."""
    return (
        serialize_canvas(d.canvas)
        + "\n"
        + serialize_content_sequence(d)
        + "\nELEMENT ATTRIBUTES: "
        + format_attribute_records(d.elements).replace("\n", " ")
    )


def translate_instruction(text: str, d: Design, client: ChatClient) -> list[EditOperation]:
    """Turn a natural-language instruction into one or more operations.

    The client sees the instruction plus a design summary and must answer
    with canonical operation lines. Anything unparseable fails atomically.
    """
    prompt = (
        _TRANSLATION_PROMPT_HEADER
        + "\n"
        + design_summary(d)
        + "\n\nINSTRUCTION: "
        + text.strip()
        + "\n\nOPERATIONS:\n"
    )
    try:
        raw = client.complete(prompt)
    except Exception as exc:
        raise TranslationError(f"translation client failed: {exc}") from exc

    ops: list[EditOperation] = []
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    for line in lines:
        try:
            ops.append(parse_operation(line))
        except Exception as exc:
            raise TranslationError(f"untranslatable line {line!r}: {exc}", raw=raw) from exc
    if not ops:
        raise TranslationError("translation produced no operations", raw=raw)
    return ops


def run_composite(
    backend,
    d: Design,
    steps: list[EditOperation],
    alpha: float,
    seed: int,
    new_elements: dict[int, NewElementSpec] | None = None,
) -> tuple[Design, list[EditDiagnostics]]:
    """Execute operations sequentially, re-extracting and re-pruning the graph
    before every step. Raises on the first failing step (no partial output is
    returned)."""
    current = d
    diagnostics = []
    for pos, step in enumerate(steps):
        g = build_relation_graph(current, alpha, seed=derive_seed(seed, "composite", pos))
        if step.target in g.nodes and step.target != CANVAS_NODE:
            g = remove_node_edges(g, step.target)
        spec = (new_elements or {}).get(pos)
        current, diag = edit_via_backend(backend, current, g, step, new_element=spec)
        diagnostics.append(diag)
    return current, diagnostics
