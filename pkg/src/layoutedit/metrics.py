"""Evaluation metrics: relation satisfaction, operation satisfaction, overlap,
alignment, and corpus-level aggregation.

Relation and operation checks run in the id space of the graph (original ids).
Designs renumber ids compactly after a delete, so evaluation first builds an
original-id view of the edited design; `original_id_view` infers the mapping
from the operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import EvaluationError
from .model import Canvas, Design, Element, Rect, bounding_box
from .ops import ADD, DELETE, MOVE, RESIZE, EditOperation
from .relations import (
    CANVAS_NODE,
    SIZE,
    RelationGraph,
    classify_position_canvas,
    classify_position_element,
    classify_size,
)

DEFAULT_TOL_PX = 1.0

# An element covering at least this fraction of the canvas counts as a
# backdrop and is excluded from overlap pairs.
BACKGROUND_COVERAGE = 0.99

ElementView = Mapping[int, Element]
EditedLike = Union[Design, ElementView]


def _as_view(edited: EditedLike) -> ElementView:
    if isinstance(edited, Design):
        return {el.id: el for el in edited.elements}
    return edited


def original_id_view(edited: Design, op: EditOperation | None, original_n: int | None = None) -> dict[int, Element]:
    """Map an edited design back into the original id space.

    After a compact-renumbering delete of element k, edited id i corresponds
    to original id i when i < k and i+1 otherwise. All other actions keep ids
    stable (add appends at the next free id). ``original_n`` is the element
    count of the design the operation was applied to; when the edited design
    is not one element short, the delete did not renumber (e.g. it named a
    donor id that was never present) and ids are taken verbatim.
    """
    if op is not None and op.action == DELETE and original_n is not None and edited.n == original_n - 1:
        k = op.target
        return {(i if i < k else i + 1): el for i, el in enumerate(edited.elements)}
    return {el.id: el for el in edited.elements}


@dataclass(frozen=True)
class RelationCheck:
    size_satisfied: int
    size_total: int
    pos_satisfied: int
    pos_total: int
    excluded: int
    violated: tuple = ()

    @property
    def size_rel(self) -> float:
        # A case with no size edges is vacuously satisfied.
        return self.size_satisfied / self.size_total if self.size_total else 1.0

    @property
    def pos_rel(self) -> float:
        return self.pos_satisfied / self.pos_total if self.pos_total else 1.0


def check_relations(
    g: RelationGraph,
    edited: EditedLike,
    alpha: float | None = None,
    *,
    canvas: Canvas | None = None,
    deleted: Iterable[int] = (),
) -> RelationCheck:
    """Re-classify every edge on the edited design and count matches.

    Each edge keeps its stored direction. Edges touching a deleted element are
    excluded from the denominator; any other dangling endpoint is an error.
    """
    if isinstance(edited, Design):
        canvas = edited.canvas
    if canvas is None:
        raise EvaluationError("a canvas is required when passing a bare element view")
    alpha = g.alpha if alpha is None else alpha
    view = _as_view(edited)
    gone = set(deleted)

    size_sat = size_tot = pos_sat = pos_tot = excluded = 0
    violated = []
    for e in g.edges:
        endpoints = [n for n in (e.source, e.target) if n != CANVAS_NODE]
        if any(n in gone for n in endpoints):
            excluded += 1
            continue
        missing = [n for n in endpoints if n not in view]
        if missing:
            raise EvaluationError(
                f"edge {e.as_text()!r} references element(s) {missing} absent from the edited design"
            )
        src = view[e.source].geom
        if e.kind == SIZE:
            ok = classify_size(src, view[e.target].geom, alpha).value == e.label
            size_tot += 1
            size_sat += ok
        else:
            if e.target == CANVAS_NODE:
                ok = classify_position_canvas(src, canvas).value == e.label
            else:
                ok = classify_position_element(src, view[e.target].geom).value == e.label
            pos_tot += 1
            pos_sat += ok
        if not ok:
            violated.append(e)
    return RelationCheck(size_sat, size_tot, pos_sat, pos_tot, excluded, tuple(violated))


def relation_satisfaction(
    g: RelationGraph,
    edited: EditedLike,
    alpha: float | None = None,
    *,
    canvas: Canvas | None = None,
    deleted: Iterable[int] = (),
) -> tuple[float, float]:
    """(Size Rel, Pos Rel) for one case; vacuous denominators count as 1.0."""
    chk = check_relations(g, edited, alpha, canvas=canvas, deleted=deleted)
    return chk.size_rel, chk.pos_rel


def op_satisfaction(op: EditOperation, edited: EditedLike, tol_px: float = DEFAULT_TOL_PX) -> int:
    """1 if the edited design meets the operation within tolerance, else 0.

    For renumbering deletes pass an original-id view (see `original_id_view`);
    a bare Design is checked verbatim against the operation's target id.
    """
    view = _as_view(edited)
    if op.action == DELETE:
        return int(op.target not in view)
    if op.action == ADD:
        return int(op.target in view)
    el = view.get(op.target)
    if el is None:
        return 0
    if op.action == MOVE:
        return int(abs(el.geom.cx - op.x) <= tol_px and abs(el.geom.cy - op.y) <= tol_px)
    if op.action == RESIZE:
        return int(abs(el.geom.w - op.width) <= tol_px and abs(el.geom.h - op.height) <= tol_px)
    raise EvaluationError(f"unknown action {op.action!r}")


def _intersection_area(a, b) -> float:
    w = min(a.x_right, b.x_right) - max(a.x_left, b.x_left)
    h = min(a.y_bottom, b.y_bottom) - max(a.y_top, b.y_top)
    return max(0.0, w) * max(0.0, h)


def canvas_rect(canvas: Canvas) -> Rect:
    return Rect(0.0, 0.0, float(canvas.width), float(canvas.height))


def is_background(el: Element, canvas: Canvas) -> bool:
    covered = _intersection_area(bounding_box(el.geom), canvas_rect(canvas))
    return covered >= BACKGROUND_COVERAGE * canvas.width * canvas.height


def overlap(d: Design) -> float:
    """Mean pairwise intersection ratio, min-area normalized.

    Full-canvas backdrops are excluded from pairs so they cannot saturate the
    metric; fewer than two remaining elements yields 0.
    """
    boxes = [bounding_box(el.geom) for el in d.elements if not is_background(el, d.canvas)]
    n = len(boxes)
    if n < 2:
        return 0.0
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            inter = _intersection_area(boxes[i], boxes[j])
            total += inter / min(boxes[i].area, boxes[j].area)
    return total * 2.0 / (n * (n - 1))


def _axis_values(el: Element) -> tuple[tuple[float, ...], tuple[float, ...]]:
    box = bounding_box(el.geom)
    return (box.x_left, el.geom.cx, box.x_right), (box.y_top, el.geom.cy, box.y_bottom)


def alignment(d: Design) -> float:
    """Mean -log10(1 - d_i) over elements, where d_i is the nearest normalized
    axis gap (left/center/right edges over width, top/center/bottom over
    height) to any other element. Perfectly aligned designs score 0."""
    if d.n < 2:
        return 0.0
    xs, ys = zip(*(_axis_values(el) for el in d.elements))
    w, h = d.canvas.width, d.canvas.height
    total = 0.0
    for i in range(d.n):
        best = math.inf
        for j in range(d.n):
            if i == j:
                continue
            for a in range(3):
                best = min(best, abs(xs[i][a] - xs[j][a]) / w, abs(ys[i][a] - ys[j][a]) / h)
        best = min(max(best, 0.0), 0.999999)
        total += -math.log10(1.0 - best)
    return total / d.n


@dataclass(frozen=True)
class EvalCase:
    """One evaluation record: the editor input, its pruned graph, the
    operation, and the edited output."""

    original: Design
    graph: RelationGraph
    operation: EditOperation
    edited: Design


@dataclass
class CaseResult:
    action: str
    check: RelationCheck
    op_flag: int
    ove: float
    ali: float


def evaluate_case(case: EvalCase, alpha: float | None = None, tol_px: float = DEFAULT_TOL_PX) -> CaseResult:
    view = original_id_view(case.edited, case.operation, case.original.n)
    deleted = {case.operation.target} if case.operation.action == DELETE else set()
    check = check_relations(case.graph, view, alpha, canvas=case.original.canvas, deleted=deleted)
    flag = op_satisfaction(case.operation, view, tol_px)
    return CaseResult(
        action=case.operation.action,
        check=check,
        op_flag=flag,
        ove=overlap(case.edited),
        ali=alignment(case.edited),
    )


@dataclass
class EvalReport:
    n_cases: int = 0
    n_errors: int = 0
    size_satisfied: int = 0
    size_total: int = 0
    pos_satisfied: int = 0
    pos_total: int = 0
    op_satisfied: int = 0
    op_total: int = 0
    ove_sum: float = 0.0
    ali_sum: float = 0.0
    per_action: dict = field(default_factory=dict)

    @property
    def size_rel(self) -> float | None:
        return self.size_satisfied / self.size_total if self.size_total else None

    @property
    def pos_rel(self) -> float | None:
        return self.pos_satisfied / self.pos_total if self.pos_total else None

    @property
    def op(self) -> float | None:
        return self.op_satisfied / self.op_total if self.op_total else None

    @property
    def ove(self) -> float | None:
        return self.ove_sum / self.n_cases if self.n_cases else None

    @property
    def ali(self) -> float | None:
        return self.ali_sum / self.n_cases if self.n_cases else None

    def add(self, result: CaseResult) -> None:
        self.n_cases += 1
        self.size_satisfied += result.check.size_satisfied
        self.size_total += result.check.size_total
        self.pos_satisfied += result.check.pos_satisfied
        self.pos_total += result.check.pos_total
        self.op_satisfied += result.op_flag
        self.op_total += 1
        self.ove_sum += result.ove
        self.ali_sum += result.ali
        slot = self.per_action.setdefault(
            result.action,
            {"n": 0, "op_satisfied": 0, "size_satisfied": 0, "size_total": 0,
             "pos_satisfied": 0, "pos_total": 0},
        )
        slot["n"] += 1
        slot["op_satisfied"] += result.op_flag
        slot["size_satisfied"] += result.check.size_satisfied
        slot["size_total"] += result.check.size_total
        slot["pos_satisfied"] += result.check.pos_satisfied
        slot["pos_total"] += result.check.pos_total

    def to_dict(self) -> dict:
        def rate(sat, tot):
            return sat / tot if tot else None

        return {
            "n_cases": self.n_cases,
            "n_errors": self.n_errors,
            "ove": self.ove,
            "ali": self.ali,
            "size_rel": self.size_rel,
            "pos_rel": self.pos_rel,
            "op": self.op,
            "per_action": {
                action: {
                    "n": s["n"],
                    "op": rate(s["op_satisfied"], s["n"]),
                    "size_rel": rate(s["size_satisfied"], s["size_total"]),
                    "pos_rel": rate(s["pos_satisfied"], s["pos_total"]),
                }
                for action, s in sorted(self.per_action.items())
            },
        }

    def to_table(self) -> str:
        def fmt(v):
            return "-" if v is None else f"{v:.4f}"

        header = f"{'Cases':>7}  {'Ove':>8}  {'Ali':>8}  {'Size Rel':>8}  {'Pos Rel':>8}  {'Op':>8}"
        row = (
            f"{self.n_cases:>7}  {fmt(self.ove):>8}  {fmt(self.ali):>8}  "
            f"{fmt(self.size_rel):>8}  {fmt(self.pos_rel):>8}  {fmt(self.op):>8}"
        )
        lines = [header, row]
        if self.per_action:
            lines.append("")
            lines.append(f"{'Action':>7}  {'n':>5}  {'Size Rel':>8}  {'Pos Rel':>8}  {'Op':>8}")
            d = self.to_dict()["per_action"]
            for action, s in d.items():
                lines.append(
                    f"{action:>7}  {s['n']:>5}  {fmt(s['size_rel']):>8}  "
                    f"{fmt(s['pos_rel']):>8}  {fmt(s['op']):>8}"
                )
        if self.n_errors:
            lines.append(f"\nerrors: {self.n_errors} case(s) excluded")
        return "\n".join(lines)


def evaluate_corpus(
    cases: Iterable[EvalCase],
    alpha: float | None = None,
    tol_px: float = DEFAULT_TOL_PX,
    on_error=None,
) -> EvalReport:
    """Aggregate metrics over a stream of cases.

    Per-case failures are counted and excluded; pass ``on_error`` to receive
    (case index, exception) callbacks for logging.
    """
    report = EvalReport()
    for idx, case in enumerate(cases):
        try:
            report.add(evaluate_case(case, alpha, tol_px))
        except Exception as exc:  # noqa: BLE001 - per-case isolation is the contract
            report.n_errors += 1
            if on_error is not None:
                on_error(idx, exc)
    return report
