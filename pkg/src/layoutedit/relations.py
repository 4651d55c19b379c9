"""Relation-graph extraction: size and position relationships between elements.

Nodes are the design's elements plus one distinguished canvas node. Every
unordered element pair contributes one size edge and one position edge whose
direction is picked by a seeded coin flip (the reverse direction is redundant);
each element also gets one position edge toward the canvas. The canvas is only
ever a target node and never takes part in size edges.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Union

from .errors import GraphError
from .model import Canvas, Design, GeometricAttrs, bounding_box

CANVAS_NODE = "canvas"
NodeId = Union[int, str]

SIZE = "size"
POSITION = "position"

DEFAULT_ALPHA = 0.1


class SizeRelation(str, Enum):
    SMALL = "small"
    EQUAL = "equal"
    LARGE = "large"


class PositionRelation(str, Enum):
    TOP_LEFT = "top-left"
    TOP = "top"
    TOP_RIGHT = "top-right"
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"
    BOTTOM_LEFT = "bottom-left"
    BOTTOM = "bottom"
    BOTTOM_RIGHT = "bottom-right"


# (row, column) -> label; rows/columns indexed 0..2 (top..bottom, left..right).
_GRID_LABELS = (
    (PositionRelation.TOP_LEFT, PositionRelation.TOP, PositionRelation.TOP_RIGHT),
    (PositionRelation.LEFT, PositionRelation.CENTER, PositionRelation.RIGHT),
    (PositionRelation.BOTTOM_LEFT, PositionRelation.BOTTOM, PositionRelation.BOTTOM_RIGHT),
)

_SIZE_INVERSE = {
    SizeRelation.SMALL: SizeRelation.LARGE,
    SizeRelation.EQUAL: SizeRelation.EQUAL,
    SizeRelation.LARGE: SizeRelation.SMALL,
}


@dataclass(frozen=True)
class Edge:
    source: NodeId
    target: NodeId
    kind: str
    label: str

    def __post_init__(self):
        if self.kind not in (SIZE, POSITION):
            raise GraphError(f"unknown edge kind {self.kind!r}")
        if self.source == self.target:
            raise GraphError("self edges are not allowed")
        if self.kind == SIZE and (self.source == CANVAS_NODE or self.target == CANVAS_NODE):
            raise GraphError("size edges never touch the canvas node")
        if self.source == CANVAS_NODE:
            raise GraphError("the canvas is only used as a target node")

    def touches(self, node: NodeId) -> bool:
        return self.source == node or self.target == node

    def as_text(self) -> str:
        tgt = "canvas" if self.target == CANVAS_NODE else f"element {self.target}"
        return f"element {self.source} {self.label} {tgt}"


@dataclass(frozen=True)
class RelationGraph:
    nodes: frozenset = field(default_factory=frozenset)
    edges: tuple[Edge, ...] = ()
    alpha: float = DEFAULT_ALPHA

    @property
    def element_ids(self) -> tuple[int, ...]:
        return tuple(sorted(n for n in self.nodes if n != CANVAS_NODE))

    def edges_of_kind(self, kind: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.kind == kind)


def classify_size(source: GeometricAttrs, target: GeometricAttrs, alpha: float = DEFAULT_ALPHA) -> SizeRelation:
    """Three-way size label from the source/target area ratio.

    small if AR < 1-alpha, equal within [1-alpha, 1+alpha], large above.
    """
    if not 0 < alpha < 1:
        raise GraphError(f"alpha must be in (0, 1), got {alpha}")
    if source.area <= 0 or target.area <= 0:
        raise GraphError("areas must be positive")
    ar = source.area / target.area
    if ar < 1 - alpha:
        return SizeRelation.SMALL
    if ar > 1 + alpha:
        return SizeRelation.LARGE
    return SizeRelation.EQUAL


def _grid_cell(v: float, lo: float, hi: float) -> int:
    # Half-open bands: [lo, hi) is the middle cell; ties on lo fall inward.
    if v < lo:
        return 0
    if v < hi:
        return 1
    return 2


def _position_label(cx: float, cy: float, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> PositionRelation:
    return _GRID_LABELS[_grid_cell(cy, y_lo, y_hi)][_grid_cell(cx, x_lo, x_hi)]


def classify_position_element(source: GeometricAttrs, target: GeometricAttrs) -> PositionRelation:
    """Nine-region label from where the source center falls relative to the
    target's bounding box, with the box edges extended across the plane."""
    box = bounding_box(target)
    return _position_label(source.cx, source.cy, box.x_left, box.x_right, box.y_top, box.y_bottom)


def classify_position_canvas(source: GeometricAttrs, canvas: Canvas) -> PositionRelation:
    """Nine-region label from an equal 3x3 grid division of the canvas.

    Centers outside the canvas land in the nearest boundary cell because the
    outer bands extend past the canvas edges.
    """
    return _position_label(
        source.cx, source.cy,
        canvas.width / 3, 2 * canvas.width / 3,
        canvas.height / 3, 2 * canvas.height / 3,
    )


def inverse_size(label: SizeRelation) -> SizeRelation:
    return _SIZE_INVERSE[SizeRelation(label)]


def build_relation_graph(d: Design, alpha: float = DEFAULT_ALPHA, seed: int | random.Random = 0) -> RelationGraph:
    """Extract the complete relation graph of a design.

    For each unordered element pair the seeded source flips a coin per edge
    kind to keep exactly one of the two redundant directions. Edge order is
    deterministic: size edges over pairs in lexicographic order, then pairwise
    position edges, then element-to-canvas position edges by element id.
    """
    if d.n < 1:
        raise GraphError("cannot build a relation graph for an empty design")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)

    size_edges = []
    pos_edges = []
    for i, j in combinations(range(d.n), 2):
        gi, gj = d.elements[i].geom, d.elements[j].geom
        src, tgt = (i, j) if rng.random() < 0.5 else (j, i)
        gs, gt = (gi, gj) if src == i else (gj, gi)
        size_edges.append(Edge(src, tgt, SIZE, classify_size(gs, gt, alpha).value))

        src, tgt = (i, j) if rng.random() < 0.5 else (j, i)
        gs, gt = (gi, gj) if src == i else (gj, gi)
        pos_edges.append(Edge(src, tgt, POSITION, classify_position_element(gs, gt).value))

    canvas_edges = [
        Edge(el.id, CANVAS_NODE, POSITION, classify_position_canvas(el.geom, d.canvas).value)
        for el in d.elements
    ]

    nodes = frozenset(range(d.n)) | {CANVAS_NODE}
    return RelationGraph(nodes=nodes, edges=tuple(size_edges + pos_edges + canvas_edges), alpha=alpha)


def remove_node_edges(g: RelationGraph, target: int) -> RelationGraph:
    """Drop every edge incident to the given element; node set is unchanged."""
    if target not in g.nodes:
        raise GraphError(f"element {target} is not a node of this graph")
    kept = tuple(e for e in g.edges if not e.touches(target))
    return RelationGraph(nodes=g.nodes, edges=kept, alpha=g.alpha)


def serialize_graph(g: RelationGraph) -> str:
    """Two text blocks listing size and position edges in edge-list order."""
    size_items = [e.as_text() for e in g.edges if e.kind == SIZE]
    pos_items = [e.as_text() for e in g.edges if e.kind == POSITION]
    return (
        "SIZE RELATIONSHIP: " + json.dumps(size_items, separators=(", ", ": "), ensure_ascii=False)
        + "\n"
        + "POSITION RELATIONSHIP: " + json.dumps(pos_items, separators=(", ", ": "), ensure_ascii=False)
    )


def graph_to_records(g: RelationGraph) -> list[dict]:
    """Machine-readable edge dump."""
    return [
        {"source": e.source, "target": e.target, "kind": e.kind, "label": e.label}
        for e in g.edges
    ]


def graph_from_records(
    records: Iterable[dict],
    alpha: float = DEFAULT_ALPHA,
    nodes: Iterable[NodeId] | None = None,
) -> RelationGraph:
    """Rebuild a graph from an edge dump.

    Pass ``nodes`` explicitly to keep isolated nodes (e.g. a pruned target);
    otherwise the node set is inferred from edge endpoints.
    """
    edges = tuple(Edge(r["source"], r["target"], r["kind"], r["label"]) for r in records)
    if nodes is None:
        inferred = {CANVAS_NODE}
        for e in edges:
            inferred.add(e.source)
            inferred.add(e.target)
        node_set = frozenset(inferred)
    else:
        node_set = frozenset(nodes) | {CANVAS_NODE}
    return RelationGraph(nodes=node_set, edges=edges, alpha=alpha)
