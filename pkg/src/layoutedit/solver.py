"""Deterministic structure-preserving editor.

Applies an operation exactly (hard constraint), then repairs the unedited
elements so the pruned relation graph stays satisfied while overlap introduced
by the edit is worked back out. Repair is seeded multi-start coordinate
descent over snap candidates (other elements' edges/centers, canvas thirds,
overlap escape lines); a candidate move is only accepted when it improves the
objective without worsening relation residuals, which keeps every hard-
satisfied edge satisfied and makes repair monotone in the residual total.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field, replace

from .errors import SolverError
from .metrics import BACKGROUND_COVERAGE, canvas_rect, original_id_view
from .model import (
    Canvas,
    Design,
    Element,
    ElementContent,
    GeometricAttrs,
    TextAttrs,
    bounding_box,
)
from .ops import ADD, DELETE, MOVE, RESIZE, EditOperation, derive_seed
from .relations import (
    CANVAS_NODE,
    SIZE,
    Edge,
    RelationGraph,
    classify_position_canvas,
    classify_position_element,
    classify_size,
)

_EPS = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.1
    margin_size: float = 0.02  # area-ratio inset, strictly inside alpha
    margin_px: float = 1.0  # position-region inset in pixels
    w_rel: float = 4.0
    w_op: float = 1.0
    w_dev: float = 0.25
    w_ove: float = 1.0
    max_iters: int = 30
    restarts: int = 2
    seed: int = 0
    time_budget_s: float = 1.5

    def __post_init__(self):
        if not 0 <= self.margin_size < self.alpha:
            raise SolverError("margin_size must sit strictly inside alpha")
        if min(self.w_rel, self.w_op, self.w_dev, self.w_ove) < 0:
            raise SolverError("weights must be >= 0")
        if self.max_iters < 1:
            raise SolverError("max_iters must be >= 1")

    @classmethod
    def from_file(cls, path: str) -> "SolverConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


@dataclass(frozen=True)
class NewElementSpec:
    """Content (and optional geometry/size hints) for an element being added."""

    content: ElementContent
    text_attrs: TextAttrs | None = None
    size_hint: tuple[float, float] | None = None
    geom: GeometricAttrs | None = None


@dataclass(frozen=True)
class EdgeResidual:
    edge: Edge
    raw: float
    normalized: float
    satisfied: bool


@dataclass(frozen=True)
class ConstraintResiduals:
    edge_residuals: tuple[EdgeResidual, ...]
    op_residual: float
    overlap_penalty: float
    total: float

    @property
    def violated_edges(self) -> tuple[Edge, ...]:
        return tuple(r.edge for r in self.edge_residuals if not r.satisfied)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "op_residual": self.op_residual,
            "overlap_penalty": self.overlap_penalty,
            "violated_edges": [
                {"source": e.source, "target": e.target, "kind": e.kind, "label": e.label}
                for e in self.violated_edges
            ],
        }


@dataclass
class SolveResult:
    design: Design
    residuals: ConstraintResiduals
    id_map: dict[int, int]  # original element id -> id in the output design
    converged: bool
    objective: float
    restart_used: int

    @property
    def pair(self) -> tuple[Design, ConstraintResiduals]:
        return self.design, self.residuals


# --- residual arithmetic ----------------------------------------------------


def _size_residual(ar: float, label: str, alpha: float, margin: float) -> float:
    """Hinge distance to the label's interval inset by ``margin``; 0 when the
    hard classification already matches."""
    lo, hi = 1 - alpha, 1 + alpha
    if label == "small":
        return 0.0 if ar < lo else ar - (lo - margin)
    if label == "large":
        return 0.0 if ar > hi else (hi + margin) - ar
    if ar < lo:
        return (lo + margin) - ar
    if ar > hi:
        return ar - (hi - margin)
    return 0.0


_COLS = {"left": 0, "center": 1, "right": 2}
_ROWS = {"top": 0, "center": 1, "bottom": 2}


def _label_cells(label: str) -> tuple[int, int]:
    parts = label.split("-")
    if len(parts) == 2:
        return _ROWS[parts[0]], _COLS[parts[1]]
    if label in ("top", "bottom"):
        return _ROWS[label], 1
    if label in ("left", "right"):
        return 1, _COLS[label]
    return 1, 1  # center


def _band(cell: int, lo: float, hi: float, margin: float) -> tuple[float, float]:
    if cell == 0:
        return -math.inf, lo - margin
    if cell == 1:
        return lo + margin, hi - margin
    return hi + margin, math.inf


def _point_band_distance(v: float, band: tuple[float, float]) -> float:
    lo, hi = band
    if v < lo:
        return lo - v
    if v > hi:
        return v - hi
    return 0.0


def _position_residual(
    cx: float,
    cy: float,
    label: str,
    x_lo: float,
    x_hi: float,
    y_lo: float,
    y_hi: float,
    margin: float,
) -> float:
    row, col = _label_cells(label)
    dx = _point_band_distance(cx, _band(col, x_lo, x_hi, margin))
    dy = _point_band_distance(cy, _band(row, y_lo, y_hi, margin))
    return math.hypot(dx, dy)


def _edge_residual(
    edge: Edge,
    geoms: dict[int, GeometricAttrs],
    canvas: Canvas,
    alpha: float,
    cfg: SolverConfig,
) -> tuple[float, float, bool] | None:
    """(raw, normalized, satisfied) for one edge, or None when an endpoint is
    missing from the working state (deleted elements)."""
    src = geoms.get(edge.source)
    if src is None:
        return None
    diag = canvas.diagonal
    if edge.kind == SIZE:
        tgt = geoms.get(edge.target)
        if tgt is None:
            return None
        ok = classify_size(src, tgt, alpha).value == edge.label
        raw = 0.0 if ok else _size_residual(src.area / tgt.area, edge.label, alpha, cfg.margin_size)
        return raw, raw / (1 + alpha), ok
    if edge.target == CANVAS_NODE:
        ok = classify_position_canvas(src, canvas).value == edge.label
        if ok:
            return 0.0, 0.0, True
        raw = _position_residual(
            src.cx, src.cy, edge.label,
            canvas.width / 3, 2 * canvas.width / 3,
            canvas.height / 3, 2 * canvas.height / 3,
            cfg.margin_px,
        )
        return raw, raw / diag, False
    tgt = geoms.get(edge.target)
    if tgt is None:
        return None
    ok = classify_position_element(src, tgt).value == edge.label
    if ok:
        return 0.0, 0.0, True
    box = bounding_box(tgt)
    raw = _position_residual(
        src.cx, src.cy, edge.label, box.x_left, box.x_right, box.y_top, box.y_bottom, cfg.margin_px
    )
    return raw, raw / diag, False


def _op_residual(op: EditOperation, geoms: dict[int, GeometricAttrs], canvas: Canvas) -> float:
    diag = canvas.diagonal
    g = geoms.get(op.target)
    if op.action == MOVE:
        return math.hypot(g.cx - op.x, g.cy - op.y) / diag if g else 1.0
    if op.action == RESIZE:
        return math.hypot(g.w - op.width, g.h - op.height) / diag if g else 1.0
    if op.action == ADD:
        return 0.0 if g is not None else 1.0
    return 0.0 if g is None else 1.0  # delete


def _pair_overlap_ratio(a: GeometricAttrs, b: GeometricAttrs) -> float:
    left = max(a.cx - a.w / 2, b.cx - b.w / 2)
    right = min(a.cx + a.w / 2, b.cx + b.w / 2)
    top = max(a.cy - a.h / 2, b.cy - b.h / 2)
    bottom = min(a.cy + a.h / 2, b.cy + b.h / 2)
    inter = max(0.0, right - left) * max(0.0, bottom - top)
    return inter / min(a.area, b.area)


def _is_background_geom(g: GeometricAttrs, canvas: Canvas) -> bool:
    box = bounding_box(g)
    crect = canvas_rect(canvas)
    w = min(box.x_right, crect.x_right) - max(box.x_left, crect.x_left)
    h = min(box.y_bottom, crect.y_bottom) - max(box.y_top, crect.y_top)
    covered = max(0.0, w) * max(0.0, h)
    return covered >= BACKGROUND_COVERAGE * canvas.width * canvas.height


def _baseline_overlap(d: Design) -> dict[tuple[int, int], float]:
    ratios: dict[tuple[int, int], float] = {}
    ids = [el.id for el in d.elements]
    for i_pos, i in enumerate(ids):
        for j in ids[i_pos + 1:]:
            ratios[(i, j)] = _pair_overlap_ratio(d.elements[i].geom, d.elements[j].geom)
    return ratios


# --- working state ----------------------------------------------------------


@dataclass
class _WorkState:
    canvas: Canvas
    geoms: dict[int, GeometricAttrs]
    fonts: dict[int, float]  # font sizes of text elements
    anchors: dict[int, GeometricAttrs] = field(default_factory=dict)

    def clone(self) -> "_WorkState":
        return _WorkState(self.canvas, dict(self.geoms), dict(self.fonts), self.anchors)


class _Objective:
    """Incrementally maintained objective over a working state.

    objective = w_rel * sum(normalized_edge_residual^2)
              + w_ove * mean(max(0, pair_ratio - baseline))   over non-background pairs
              + w_dev * sum(normalized deviation from anchors)
    """

    def __init__(
        self,
        state: _WorkState,
        graph: RelationGraph,
        cfg: SolverConfig,
        baseline: dict[tuple[int, int], float],
        pinned: set[int],
    ):
        self.state = state
        self.graph = graph
        self.cfg = cfg
        self.baseline = baseline
        self.pinned = pinned
        self.diag = state.canvas.diagonal

        self.backgrounds = {
            i for i, g in state.geoms.items() if _is_background_geom(g, state.canvas)
        }
        ids = sorted(state.geoms)
        self.pairs = [
            (i, j)
            for pos, i in enumerate(ids)
            for j in ids[pos + 1:]
            if i not in self.backgrounds and j not in self.backgrounds
        ]
        self.n_pairs = max(1, len(self.pairs))

        self.edge_vals: dict[int, float] = {}
        self.edges_by_elem: dict[int, list[int]] = {i: [] for i in ids}
        for idx, e in enumerate(self.graph.edges):
            res = _edge_residual(e, state.geoms, state.canvas, cfg.alpha, cfg)
            if res is None:
                continue
            self.edge_vals[idx] = res[1]
            for node in (e.source, e.target):
                if node != CANVAS_NODE and node in self.edges_by_elem:
                    self.edges_by_elem[node].append(idx)

        self.pair_vals: dict[tuple[int, int], float] = {}
        self.pairs_by_elem: dict[int, list[tuple[int, int]]] = {i: [] for i in ids}
        for i, j in self.pairs:
            base = self.baseline.get((i, j), 0.0)
            self.pair_vals[(i, j)] = max(
                0.0, _pair_overlap_ratio(state.geoms[i], state.geoms[j]) - base
            )
            self.pairs_by_elem[i].append((i, j))
            self.pairs_by_elem[j].append((i, j))

        self.dev_vals = {i: self._dev(i, state.geoms[i]) for i in ids}

        self.edge_sq = sum(v * v for v in self.edge_vals.values())
        self.edge_sum = sum(self.edge_vals.values())
        self.ove_sum = sum(self.pair_vals.values())
        self.dev_sum = sum(self.dev_vals.values())

    def _dev(self, i: int, g: GeometricAttrs) -> float:
        a = self.state.anchors.get(i)
        if a is None:
            return 0.0
        return (
            (g.cx - a.cx) ** 2 + (g.cy - a.cy) ** 2 + (g.w - a.w) ** 2 + (g.h - a.h) ** 2
        ) / (self.diag**2)

    @property
    def value(self) -> float:
        cfg = self.cfg
        return (
            cfg.w_rel * self.edge_sq
            + cfg.w_ove * self.ove_sum / self.n_pairs
            + cfg.w_dev * self.dev_sum
        )

    def residual_total(self, op_residual: float) -> float:
        cfg = self.cfg
        return (
            cfg.w_rel * self.edge_sq
            + cfg.w_op * op_residual**2
            + cfg.w_ove * self.ove_sum / self.n_pairs
        )

    def propose(self, elem: int, new_geom: GeometricAttrs):
        """Deltas from replacing ``elem``'s geometry, without committing.

        Returns (objective_delta, edge_sum_delta, patch) where patch carries
        the recomputed terms for `commit`.
        """
        geoms = self.state.geoms
        old_geom = geoms[elem]
        geoms[elem] = new_geom  # temporarily, for shared helpers
        try:
            edge_patch = {}
            d_sq = d_sum = 0.0
            for idx in self.edges_by_elem[elem]:
                res = _edge_residual(
                    self.graph.edges[idx], geoms, self.state.canvas, self.cfg.alpha, self.cfg
                )
                new_v = res[1] if res else 0.0
                old_v = self.edge_vals[idx]
                edge_patch[idx] = new_v
                d_sq += new_v * new_v - old_v * old_v
                d_sum += new_v - old_v

            pair_patch = {}
            d_ove = 0.0
            for key in self.pairs_by_elem.get(elem, ()):
                i, j = key
                base = self.baseline.get(key, 0.0)
                new_v = max(0.0, _pair_overlap_ratio(geoms[i], geoms[j]) - base)
                d_ove += new_v - self.pair_vals[key]
                pair_patch[key] = new_v

            new_dev = self._dev(elem, new_geom)
            d_dev = new_dev - self.dev_vals[elem]
        finally:
            geoms[elem] = old_geom

        cfg = self.cfg
        d_obj = cfg.w_rel * d_sq + cfg.w_ove * d_ove / self.n_pairs + cfg.w_dev * d_dev
        patch = (elem, new_geom, edge_patch, d_sq, d_sum, pair_patch, d_ove, new_dev, d_dev)
        return d_obj, d_sum, patch

    def commit(self, patch) -> None:
        elem, new_geom, edge_patch, d_sq, d_sum, pair_patch, d_ove, new_dev, d_dev = patch
        self.state.geoms[elem] = new_geom
        self.edge_vals.update(edge_patch)
        self.edge_sq += d_sq
        self.edge_sum += d_sum
        self.pair_vals.update(pair_patch)
        self.ove_sum += d_ove
        self.dev_vals[elem] = new_dev
        self.dev_sum += d_dev


# --- public operations -------------------------------------------------------


def _scaled_text_attrs(el: Element, scale: float) -> TextAttrs | None:
    if el.text_attrs is None or scale == 1.0:
        return el.text_attrs
    return replace(el.text_attrs, font_size=max(1.0, el.text_attrs.font_size * scale))


def apply_operation_exact(
    d: Design,
    op: EditOperation,
    new_element: NewElementSpec | None = None,
    graph: RelationGraph | None = None,
    cfg: SolverConfig | None = None,
) -> Design:
    """Apply the operation with no repair: the target changes, nothing else.

    Delete renumbers the remaining ids compactly. Add appends at the next
    free id with provisional geometry from `place_new_element` unless the
    spec carries explicit geometry. Resizing a text element scales its font
    size with the geometric scale factor.
    """
    if op.action == ADD:
        if op.target != d.n:
            raise SolverError(f"add target must be the next free id {d.n}, got {op.target}")
        if new_element is None:
            raise SolverError("add requires the new element's content")
        geom = new_element.geom or place_new_element(
            d, graph, new_element.content, cfg or SolverConfig(), size_hint=new_element.size_hint
        )
        el = Element(
            id=d.n, content=new_element.content, geom=geom, text_attrs=new_element.text_attrs
        )
        return Design(canvas=d.canvas, elements=d.elements + (el,))

    if not 0 <= op.target < d.n:
        raise SolverError(f"element {op.target} does not exist")
    if op.action == DELETE:
        rest = [el for el in d.elements if el.id != op.target]
        return d.with_elements(rest)

    el = d.elements[op.target]
    if op.action == MOVE:
        new_el = replace(el, geom=replace(el.geom, cx=float(op.x), cy=float(op.y)))
    else:  # resize
        scale = math.sqrt((op.width * op.height) / (el.geom.w * el.geom.h))
        new_el = replace(
            el,
            geom=replace(el.geom, w=float(op.width), h=float(op.height)),
            text_attrs=_scaled_text_attrs(el, scale),
        )
    elements = list(d.elements)
    elements[op.target] = new_el
    return Design(canvas=d.canvas, elements=tuple(elements))


def residuals(
    d: Design,
    g: RelationGraph,
    op: EditOperation,
    cfg: SolverConfig | None = None,
    original: Design | None = None,
) -> ConstraintResiduals:
    """Constraint residual report for a (possibly edited) design.

    ``original`` supplies the overlap baseline (overlap beyond the original
    design's own level is penalized); when omitted, ``d`` is its own baseline
    and the overlap penalty is zero.
    """
    cfg = cfg or SolverConfig(alpha=g.alpha)
    view = original_id_view(d, op, len(g.element_ids))
    geoms = {i: el.geom for i, el in view.items()}
    base = _baseline_overlap(original) if original is not None else None
    return _bundle(geoms, d.canvas, g, op, cfg, base)


def _bundle(
    geoms: dict[int, GeometricAttrs],
    canvas: Canvas,
    g: RelationGraph,
    op: EditOperation,
    cfg: SolverConfig,
    baseline: dict[tuple[int, int], float] | None,
) -> ConstraintResiduals:
    edge_residuals = []
    for e in g.edges:
        res = _edge_residual(e, geoms, canvas, cfg.alpha, cfg)
        if res is None:
            continue
        edge_residuals.append(EdgeResidual(e, res[0], res[1], res[2]))

    op_res = _op_residual(op, geoms, canvas)

    backgrounds = {i for i, gm in geoms.items() if _is_background_geom(gm, canvas)}
    ids = sorted(geoms)
    pen_sum, n_pairs = 0.0, 0
    for pos, i in enumerate(ids):
        if i in backgrounds:
            continue
        for j in ids[pos + 1:]:
            if j in backgrounds:
                continue
            n_pairs += 1
            ratio = _pair_overlap_ratio(geoms[i], geoms[j])
            base = baseline.get((i, j), 0.0) if baseline is not None else ratio
            pen_sum += max(0.0, ratio - base)
    penalty = pen_sum / n_pairs if n_pairs else 0.0

    total = (
        cfg.w_rel * sum(r.normalized**2 for r in edge_residuals)
        + cfg.w_op * op_res**2
        + cfg.w_ove * penalty
    )
    return ConstraintResiduals(tuple(edge_residuals), op_res, penalty, total)


def place_new_element(
    d: Design,
    g: RelationGraph | None,
    content: ElementContent,
    cfg: SolverConfig | None = None,
    size_hint: tuple[float, float] | None = None,
) -> GeometricAttrs:
    """Choose geometry for a new element on the alignment grid.

    Candidates are enumerated on existing edge/center lines crossed with
    canvas-third lines; the one minimizing overlap with existing elements,
    boundary violation, and crowding wins. Fully deterministic: ties break
    lexicographically.
    """
    del g  # placement scores do not consult the graph today
    cfg = cfg or SolverConfig()
    cw, ch = float(d.canvas.width), float(d.canvas.height)
    w0, h0 = size_hint if size_hint else (cw / 4, ch / 4)
    scale = min(1.0, cw / w0, ch / h0)
    w, h = w0 * scale, h0 * scale

    others = [el.geom for el in d.elements if not _is_background_geom(el.geom, d.canvas)]
    diag = d.canvas.diagonal

    def lines(axis: int) -> list[float]:
        vals = {cw / 3, cw / 2, 2 * cw / 3, 0.0, cw} if axis == 0 else {ch / 3, ch / 2, 2 * ch / 3, 0.0, ch}
        for geom in others:
            box = bounding_box(geom)
            if axis == 0:
                vals.update((box.x_left, geom.cx, box.x_right))
            else:
                vals.update((box.y_top, geom.cy, box.y_bottom))
        return sorted(vals)

    def candidates(axis: int, half: float) -> list[float]:
        out = set()
        for line in lines(axis):
            out.update((line, line - half, line + half))
        limit = cw if axis == 0 else ch
        return sorted(v for v in out if -half <= v <= limit + half)

    new = GeometricAttrs(cx=0.0, cy=0.0, w=w, h=h)
    crect = canvas_rect(d.canvas)

    best = None
    for cx in candidates(0, w / 2):
        for cy in candidates(1, h / 2):
            cand = replace(new, cx=cx, cy=cy)
            box = bounding_box(cand)
            inside_w = min(box.x_right, crect.x_right) - max(box.x_left, crect.x_left)
            inside_h = min(box.y_bottom, crect.y_bottom) - max(box.y_top, crect.y_top)
            inside = max(0.0, inside_w) * max(0.0, inside_h)
            boundary = 1.0 - inside / cand.area

            ove = sum(_pair_overlap_ratio(cand, o) for o in others)
            crowd = 0.0
            if others:
                crowd = sum(
                    max(0.0, 1.0 - math.hypot(cand.cx - o.cx, cand.cy - o.cy) / (0.5 * diag))
                    for o in others
                ) / len(others)
            score = ove + boundary + 0.25 * crowd
            key = (score, cx, cy)
            if best is None or key < best[0]:
                best = (key, cand)
    if best is None:
        raise SolverError("no placement candidates could be generated")
    return best[1]


def _candidate_positions(
    obj: _Objective, elem: int, axis: int
) -> list[float]:
    state = obj.state
    g = state.geoms[elem]
    half = (g.w if axis == 0 else g.h) / 2
    cur = g.cx if axis == 0 else g.cy
    canvas = state.canvas
    limit = canvas.width if axis == 0 else canvas.height

    vals = {cur}
    anchor = state.anchors.get(elem)
    if anchor is not None:
        vals.add(anchor.cx if axis == 0 else anchor.cy)
    for line in (limit / 3, limit / 2, 2 * limit / 3, 0.0, float(limit)):
        vals.update((line, line - half, line + half))
    for oid, og in state.geoms.items():
        if oid == elem:
            continue
        box = bounding_box(og)
        if axis == 0:
            trio = (box.x_left, og.cx, box.x_right)
        else:
            trio = (box.y_top, og.cy, box.y_bottom)
        for line in trio:
            vals.update((line, line - half, line + half))
        # escape lines: slide just clear of an overlapping partner
        if _pair_overlap_ratio(g, og) > 0:
            if axis == 0:
                vals.update((box.x_left - half, box.x_right + half))
            else:
                vals.update((box.y_top - half, box.y_bottom + half))
    lo, hi = -2 * half - limit * 0.25, limit + 2 * half + limit * 0.25
    return [v for v in sorted(vals) if lo <= v <= hi and abs(v - cur) > 1e-9]


_SCALE_FACTORS = (0.95, 0.9, 0.8, 1.05)


def _candidate_scales(obj: _Objective, elem: int) -> list[float]:
    g = obj.state.geoms[elem]
    scales = set(_SCALE_FACTORS)
    anchor = obj.state.anchors.get(elem)
    if anchor is not None and anchor.w > 0:
        scales.add(anchor.w / g.w)
    return [s for s in sorted(scales) if s > 0 and abs(s - 1.0) > 1e-9]


def _elem_hot(obj: _Objective, elem: int) -> bool:
    """Whether any objective term involving the element is non-zero.

    Moving a cold element can only add cost (all its terms sit at zero), so
    sweeps skip it outright.
    """
    if obj.dev_vals[elem] > 0:
        return True
    if any(obj.edge_vals[i] > 0 for i in obj.edges_by_elem[elem]):
        return True
    return any(obj.pair_vals[k] > 0 for k in obj.pairs_by_elem.get(elem, ()))


def _descend(
    obj: _Objective,
    movable: list[int],
    cfg: SolverConfig,
    deadline: float,
) -> bool:
    """Coordinate-descent sweeps; returns True when converged in budget."""
    for _ in range(cfg.max_iters):
        improved = False
        for elem in movable:
            if time.monotonic() > deadline:
                return False
            if not _elem_hot(obj, elem):
                continue
            g = obj.state.geoms[elem]
            for axis in (0, 1):
                if time.monotonic() > deadline:
                    return False
                best = None
                for v in _candidate_positions(obj, elem, axis):
                    cand = replace(g, cx=v) if axis == 0 else replace(g, cy=v)
                    d_obj, d_edges, patch = obj.propose(elem, cand)
                    if d_edges > 1e-12 or d_obj >= -1e-12:
                        continue
                    if best is None or d_obj < best[0]:
                        best = (d_obj, patch)
                if best is not None:
                    obj.commit(best[1])
                    g = obj.state.geoms[elem]
                    improved = True
            # uniform rescale candidates (fonts follow scale at extraction)
            best = None
            for s in _candidate_scales(obj, elem):
                cand = replace(g, w=g.w * s, h=g.h * s)
                d_obj, d_edges, patch = obj.propose(elem, cand)
                if d_edges > 1e-12 or d_obj >= -1e-12:
                    continue
                if best is None or d_obj < best[0]:
                    best = (d_obj, patch)
            if best is not None:
                obj.commit(best[1])
                improved = True
        if not improved:
            return True
    return False


def _initial_state(
    d: Design,
    op: EditOperation,
    new_element: NewElementSpec | None,
    g: RelationGraph,
    cfg: SolverConfig,
) -> tuple[_WorkState, set[int]]:
    """Exact-apply in original-id space; returns state plus ids pinned hard."""
    geoms = {el.id: el.geom for el in d.elements}
    fonts = {el.id: el.text_attrs.font_size for el in d.elements if el.text_attrs}
    pinned: set[int] = set()

    if op.action == MOVE:
        if op.target not in geoms:
            raise SolverError(f"element {op.target} does not exist")
        geoms[op.target] = replace(geoms[op.target], cx=float(op.x), cy=float(op.y))
        pinned.add(op.target)
    elif op.action == RESIZE:
        if op.target not in geoms:
            raise SolverError(f"element {op.target} does not exist")
        old = geoms[op.target]
        geoms[op.target] = replace(old, w=float(op.width), h=float(op.height))
        if op.target in fonts:
            scale = math.sqrt((op.width * op.height) / (old.w * old.h))
            fonts[op.target] = max(1.0, fonts[op.target] * scale)
        pinned.add(op.target)
    elif op.action == DELETE:
        if op.target not in geoms:
            raise SolverError(f"element {op.target} does not exist")
        geoms.pop(op.target)
        fonts.pop(op.target, None)
    elif op.action == ADD:
        if op.target == d.n:
            if new_element is None:
                raise SolverError("add requires the new element's content")
            geom = new_element.geom or place_new_element(
                d, g, new_element.content, cfg, size_hint=new_element.size_hint
            )
            geoms[op.target] = geom
            if new_element.text_attrs is not None:
                fonts[op.target] = new_element.text_attrs.font_size
        elif op.target not in geoms:
            raise SolverError(f"add target {op.target} is neither present nor the next free id")
        # an add target already present is an idempotent add: nothing to place

    state = _WorkState(canvas=d.canvas, geoms=geoms, fonts=fonts)
    state.anchors = dict(geoms)
    return state, pinned


def _state_to_design(
    d: Design,
    op: EditOperation,
    new_element: NewElementSpec | None,
    state: _WorkState,
) -> tuple[Design, dict[int, int]]:
    contents: dict[int, Element] = {el.id: el for el in d.elements}
    elements = []
    id_map: dict[int, int] = {}
    for new_id, orig_id in enumerate(sorted(state.geoms)):
        if orig_id in contents:
            src = contents[orig_id]
            text_attrs = src.text_attrs
        else:
            src = None
            text_attrs = new_element.text_attrs if new_element else None
        if text_attrs is not None and orig_id in state.fonts:
            text_attrs = replace(text_attrs, font_size=state.fonts[orig_id])
        elements.append(
            Element(
                id=new_id,
                content=src.content if src else new_element.content,
                geom=state.geoms[orig_id],
                text_attrs=text_attrs,
            )
        )
        id_map[orig_id] = new_id
    return Design(canvas=d.canvas, elements=tuple(elements)), id_map


def solve(
    d: Design,
    g: RelationGraph,
    op: EditOperation,
    cfg: SolverConfig | None = None,
    new_element: NewElementSpec | None = None,
) -> SolveResult:
    """Apply the operation exactly, then repair unedited elements.

    The operation is never relaxed. Repair minimizes relation residuals,
    overlap introduced by the edit, and deviation from the original layout;
    the final state never has a worse residual total than the exact
    application alone. Deterministic for a given config seed.
    """
    cfg = cfg or SolverConfig(alpha=g.alpha)
    deadline = time.monotonic() + cfg.time_budget_s
    base_state, pinned = _initial_state(d, op, new_element, g, cfg)
    baseline_pairs = _baseline_overlap(d)

    def bundle_for(state: _WorkState) -> ConstraintResiduals:
        return _bundle(state.geoms, d.canvas, g, op, cfg, baseline_pairs)

    baseline_res = bundle_for(base_state)
    if baseline_res.total <= _EPS:
        design, id_map = _state_to_design(d, op, new_element, base_state)
        return SolveResult(design, baseline_res, id_map, True, 0.0, 0)

    def edge_sum(res: ConstraintResiduals) -> float:
        return sum(r.normalized for r in res.edge_residuals)

    baseline_edges = edge_sum(baseline_res)
    movable = sorted(set(base_state.geoms) - pinned)
    outcomes = []
    for restart in range(cfg.restarts + 1):
        state = base_state.clone()
        if restart > 0:
            rng = random.Random(derive_seed(cfg.seed, "restart", restart))
            _jitter(state, pinned, rng)
        obj = _Objective(state, g, cfg, baseline_pairs, pinned)
        converged = _descend(obj, movable, cfg, deadline)
        res = bundle_for(state)
        outcomes.append((obj.value, restart, state, res, converged))
        if res.total <= _EPS or time.monotonic() > deadline:
            break

    # Structure preservation is never traded away: besides a monotone
    # residual total, relation residuals themselves must not worsen.
    eligible = [
        o
        for o in outcomes
        if o[3].total <= baseline_res.total + _EPS and edge_sum(o[3]) <= baseline_edges + _EPS
    ]
    if not eligible:
        # exact application is always admissible
        design, id_map = _state_to_design(d, op, new_element, base_state)
        return SolveResult(design, baseline_res, id_map, False, 0.0, 0)
    value, restart, state, res, converged = min(eligible, key=lambda o: (o[0], o[1]))
    _rescale_fonts(state)
    design, id_map = _state_to_design(d, op, new_element, state)
    return SolveResult(design, res, id_map, converged, value, restart)


def _rescale_fonts(state: _WorkState) -> None:
    # Text scaled during repair carries its font size along.
    for i, size in list(state.fonts.items()):
        anchor = state.anchors.get(i)
        geom = state.geoms.get(i)
        if anchor is None or geom is None:
            continue
        ratio = geom.w / anchor.w
        if abs(ratio - 1.0) > 1e-9:
            state.fonts[i] = max(1.0, size * ratio)


def _jitter(state: _WorkState, pinned: set[int], rng: random.Random) -> None:
    """Perturb elements involved in residual overlap to escape local minima."""
    ids = sorted(state.geoms)
    hot = set()
    for pos, i in enumerate(ids):
        for j in ids[pos + 1:]:
            if _pair_overlap_ratio(state.geoms[i], state.geoms[j]) > 0:
                hot.update((i, j))
    for i in sorted(hot - pinned):
        g = state.geoms[i]
        state.geoms[i] = replace(
            g,
            cx=g.cx + rng.uniform(-0.08, 0.08) * state.canvas.width,
            cy=g.cy + rng.uniform(-0.08, 0.08) * state.canvas.height,
        )


def solve_prepared(prep, cfg: SolverConfig | None = None) -> SolveResult:
    """Run the solver on a synthesized `PreparedEdit`."""
    new_element = None
    if prep.add_content is not None and prep.operation.target == prep.design.n:
        new_element = NewElementSpec(
            content=prep.add_content,
            text_attrs=prep.add_text_attrs,
            size_hint=prep.add_size_hint,
        )
    return solve(prep.design, prep.graph, prep.operation, cfg, new_element=new_element)
