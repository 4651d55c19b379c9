"""Editing-operation grammar, canonical printing/parsing, and synthesis.

An operation is an action (move/resize/add/delete), a target element id, and
integer parameters for move (new center) and resize (new width/height). The
canonical wire form is a single line, e.g.::

    move element 3 to {"x": 583, "y": 394}

Synthesis produces ready-to-run edits for the two test settings: the
reconstruction setting reads parameters off the design itself (so the design
is its own ground truth), while the generalization setting samples parameters
to simulate user edits.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass

from .errors import GrammarError, SynthesisError
from .model import Design, Element, ElementContent, TextAttrs, round_px
from .relations import DEFAULT_ALPHA, RelationGraph, build_relation_graph, remove_node_edges

MOVE = "move"
RESIZE = "resize"
ADD = "add"
DELETE = "delete"
ACTIONS = (MOVE, RESIZE, ADD, DELETE)

RESIZE_FACTOR_RANGE = (0.5, 2.0)

RECONSTRUCTION = "reconstruction"
GENERALIZATION = "generalization"
SETTINGS = (RECONSTRUCTION, GENERALIZATION)


@dataclass(frozen=True)
class EditOperation:
    action: str
    target: int
    x: int | None = None
    y: int | None = None
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise GrammarError("unknown action", self.action)
        if self.target < 0:
            raise GrammarError(f"target must be >= 0, got {self.target}")
        has_xy = self.x is not None or self.y is not None
        has_wh = self.width is not None or self.height is not None
        if self.action == MOVE:
            if self.x is None or self.y is None or has_wh:
                raise GrammarError("move takes exactly x and y parameters")
        elif self.action == RESIZE:
            if self.width is None or self.height is None or has_xy:
                raise GrammarError("resize takes exactly width and height parameters")
            if self.width <= 0 or self.height <= 0:
                raise GrammarError(f"resize dimensions must be > 0, got {self.width}x{self.height}")
        elif has_xy or has_wh:
            raise GrammarError(f"{self.action} takes no parameters")


_MOVE_RE = re.compile(
    r'^move\s+element\s+(?P<target>\d+)\s+to\s+\{\s*"x"\s*:\s*(?P<x>-?\d+)\s*,\s*"y"\s*:\s*(?P<y>-?\d+)\s*\}$'
)
_RESIZE_RE = re.compile(
    r'^resize\s+element\s+(?P<target>\d+)\s+to\s+\{\s*"width"\s*:\s*(?P<w>\d+)\s*,\s*"height"\s*:\s*(?P<h>\d+)\s*\}$'
)
_PLAIN_RE = re.compile(r"^(?P<action>add|delete)\s+element\s+(?P<target>\d+)$")


def parse_operation(text: str) -> EditOperation:
    """Parse one operation line; whitespace is tolerated, action names are not."""
    stripped = text.strip()
    m = _MOVE_RE.match(stripped)
    if m:
        return EditOperation(MOVE, int(m["target"]), x=int(m["x"]), y=int(m["y"]))
    m = _RESIZE_RE.match(stripped)
    if m:
        return EditOperation(RESIZE, int(m["target"]), width=int(m["w"]), height=int(m["h"]))
    m = _PLAIN_RE.match(stripped)
    if m:
        return EditOperation(m["action"], int(m["target"]))

    first = stripped.split(None, 1)[0] if stripped else ""
    if first not in ACTIONS:
        raise GrammarError("unknown action", first)
    raise GrammarError(f"malformed {first} operation", stripped)


def print_operation(op: EditOperation) -> str:
    """Canonical single-line form; stable byte-for-byte."""
    if op.action == MOVE:
        return f'move element {op.target} to {{"x": {op.x}, "y": {op.y}}}'
    if op.action == RESIZE:
        return f'resize element {op.target} to {{"width": {op.width}, "height": {op.height}}}'
    return f"{op.action} element {op.target}"


def operation_from_record(rec: dict) -> EditOperation:
    """Structured form {action, target, params?} -> operation.

    Parameters may sit in a nested ``params`` object or at the top level.
    """
    if not isinstance(rec, dict) or "action" not in rec or "target" not in rec:
        raise GrammarError("structured operation needs 'action' and 'target'")
    params = rec.get("params") or rec

    def as_int(key):
        value = params.get(key)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise GrammarError(f"parameter {key} must be an integer", str(value))
        return int(value)

    return EditOperation(
        action=rec["action"],
        target=int(rec["target"]),
        x=as_int("x"),
        y=as_int("y"),
        width=as_int("width"),
        height=as_int("height"),
    )


@dataclass(frozen=True)
class CompositeOperation:
    steps: tuple[EditOperation, ...]

    def __post_init__(self):
        if not self.steps:
            raise GrammarError("composite operation needs at least one step")


def compose(ops: list[EditOperation] | tuple[EditOperation, ...]) -> CompositeOperation:
    return CompositeOperation(steps=tuple(ops))


def validate_composite(d: Design, comp: CompositeOperation) -> None:
    """Check step-wise target validity by tracking the element count.

    Ids stay contiguous through every step (delete renumbers compactly, add
    appends at the next free id), so a count suffices.
    """
    n = d.n
    for pos, step in enumerate(comp.steps):
        if step.action == ADD:
            if step.target != n:
                raise SynthesisError(
                    f"step {pos}: add target must be the next free id {n}, got {step.target}"
                )
            n += 1
        else:
            if not 0 <= step.target < n:
                raise SynthesisError(
                    f"step {pos}: element {step.target} does not exist at this point"
                )
            if step.action == DELETE:
                n -= 1


@dataclass(frozen=True)
class PreparedEdit:
    """A synthesized operation bundled with everything needed to run it.

    ``design`` is the editor input: the original design, with the donor
    element appended for reconstruction-delete draws. ``graph`` is already
    pruned at the operation target. ``ground_truth`` (reconstruction only)
    is the original design, which the edit should reproduce.
    """

    operation: EditOperation
    design: Design
    graph: RelationGraph
    setting: str
    add_content: ElementContent | None = None
    add_text_attrs: TextAttrs | None = None
    add_size_hint: tuple[float, float] | None = None
    ground_truth: Design | None = None


def derive_seed(*parts) -> int:
    """Stable cross-platform seed derivation (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def _pruned_graph(d: Design, alpha: float, rng: random.Random) -> tuple[RelationGraph, int]:
    graph_seed = rng.getrandbits(32)
    return build_relation_graph(d, alpha, seed=graph_seed), graph_seed


def _append_donor(d: Design, donor: Element) -> Design:
    appended = d.elements + (donor,)
    return d.with_elements(appended)


def synthesize_reconstruction_op(
    d: Design,
    donor_pool: list[Element],
    seed: int,
    alpha: float = DEFAULT_ALPHA,
) -> PreparedEdit:
    """Draw a reconstruction-setting edit: parameters come from the design.

    Move/resize carry the target's real rounded attributes; add withholds the
    target's attributes (content only); delete names a donor element drawn
    from the held-out pool and appended at the next free id.
    """
    if d.n < 1:
        raise SynthesisError("cannot synthesize an operation for an empty design")
    rng = random.Random(seed)
    graph, _ = _pruned_graph(d, alpha, rng)
    action = ACTIONS[rng.randrange(4)]

    if action == DELETE:
        if not donor_pool:
            raise SynthesisError("delete drawn but the donor pool is empty")
        donor = donor_pool[rng.randrange(len(donor_pool))]
        op = EditOperation(DELETE, d.n)
        return PreparedEdit(
            operation=op,
            design=_append_donor(d, donor),
            graph=graph,  # built from d alone: the donor has no edges
            setting=RECONSTRUCTION,
            ground_truth=d,
        )

    target = rng.randrange(d.n)
    el = d.elements[target]
    if action == MOVE:
        op = EditOperation(MOVE, target, x=round_px(el.geom.cx), y=round_px(el.geom.cy))
    elif action == RESIZE:
        op = EditOperation(RESIZE, target, width=max(1, round_px(el.geom.w)),
                           height=max(1, round_px(el.geom.h)))
    else:  # add: content included, attributes withheld
        op = EditOperation(ADD, target)
    return PreparedEdit(
        operation=op,
        design=d,
        graph=remove_node_edges(graph, target),
        setting=RECONSTRUCTION,
        add_content=el.content if action == ADD else None,
        add_text_attrs=el.text_attrs if action == ADD else None,
        ground_truth=d,
    )


def synthesize_generalization_op(
    d: Design,
    donor_pool: list[Element],
    seed: int,
    alpha: float = DEFAULT_ALPHA,
) -> PreparedEdit:
    """Draw a generalization-setting edit: parameters simulate a user.

    Move centers are uniform over the canvas; resize scales both dimensions
    by one factor uniform in [0.5, 2.0]; add introduces a donor element's
    content at a fresh id; delete targets an existing element. No ground
    truth exists for these draws.
    """
    if d.n < 1:
        raise SynthesisError("cannot synthesize an operation for an empty design")
    rng = random.Random(seed)
    graph, _ = _pruned_graph(d, alpha, rng)
    action = ACTIONS[rng.randrange(4)]

    if action == ADD:
        if not donor_pool:
            raise SynthesisError("add drawn but the donor pool is empty")
        donor = donor_pool[rng.randrange(len(donor_pool))]
        op = EditOperation(ADD, d.n)
        return PreparedEdit(
            operation=op,
            design=d,
            graph=graph,  # fresh id has no edges to prune
            setting=GENERALIZATION,
            add_content=donor.content,
            add_text_attrs=donor.text_attrs,
            add_size_hint=(donor.geom.w, donor.geom.h),
        )

    target = rng.randrange(d.n)
    el = d.elements[target]
    if action == MOVE:
        op = EditOperation(
            MOVE, target,
            x=round_px(rng.uniform(0, d.canvas.width)),
            y=round_px(rng.uniform(0, d.canvas.height)),
        )
    elif action == RESIZE:
        factor = rng.uniform(*RESIZE_FACTOR_RANGE)
        op = EditOperation(
            RESIZE, target,
            width=max(1, round_px(el.geom.w * factor)),
            height=max(1, round_px(el.geom.h * factor)),
        )
    else:
        op = EditOperation(DELETE, target)
    return PreparedEdit(
        operation=op,
        design=d,
        graph=remove_node_edges(graph, target),
        setting=GENERALIZATION,
    )


def synthesize_op(
    d: Design,
    donor_pool: list[Element],
    seed: int,
    setting: str,
    alpha: float = DEFAULT_ALPHA,
) -> PreparedEdit:
    if setting == RECONSTRUCTION:
        return synthesize_reconstruction_op(d, donor_pool, seed, alpha)
    if setting == GENERALIZATION:
        return synthesize_generalization_op(d, donor_pool, seed, alpha)
    raise SynthesisError(f"unknown setting {setting!r}")
