"""Canonical design document schema, ingestion, validation, and serialization.

A design is a fixed canvas plus an ordered list of elements (list order is
layer order, index 0 at the bottom). Every element carries center-based
geometry; text elements additionally carry angle, font size, and alignment.
Coordinates are stored as reals and only rounded to integers at prompt
boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, NamedTuple

from .errors import DesignParseError, DesignValidationError

IMAGE = "image"
TEXT = "text"
MODALITIES = (IMAGE, TEXT)
TEXT_ALIGNS = ("left", "center", "right")

IMAGE_PLACEHOLDER = "<image>"

# Key order of attribute records at prompt boundaries.
_IMAGE_ATTR_KEYS = ("index", "x", "y", "width", "height")
_TEXT_ATTR_KEYS = _IMAGE_ATTR_KEYS + ("angle", "font_size", "text_align")


def round_px(value: float) -> int:
    """Round a pixel quantity to an integer for prompt-boundary output."""
    return int(round(value))


class Rect(NamedTuple):
    x_left: float
    y_top: float
    x_right: float
    y_bottom: float

    @property
    def width(self) -> float:
        return self.x_right - self.x_left

    @property
    def height(self) -> float:
        return self.y_bottom - self.y_top

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Canvas:
    """Fixed drawing surface; immutable under every editing operation."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DesignValidationError(
                [("canvas", f"width/height must be >= 1, got {self.width}x{self.height}")]
            )

    @property
    def diagonal(self) -> float:
        return (self.width**2 + self.height**2) ** 0.5


@dataclass(frozen=True)
class GeometricAttrs:
    """Center-based box geometry. Centers may lie outside the canvas."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise DesignValidationError(
                [("geom", f"width and height must be > 0, got {self.w}x{self.h}")]
            )

    @property
    def area(self) -> float:
        return self.w * self.h


def bounding_box(g: GeometricAttrs) -> Rect:
    """Axis-aligned bounding box of a center-based geometry."""
    return Rect(g.cx - g.w / 2, g.cy - g.h / 2, g.cx + g.w / 2, g.cy + g.h / 2)


@dataclass(frozen=True)
class TextAttrs:
    font_size: float
    text_align: str = "left"
    angle: float = 0.0

    def __post_init__(self):
        if not self.font_size > 0:
            raise DesignValidationError([("text_attrs", f"font_size must be > 0, got {self.font_size}")])
        if self.text_align not in TEXT_ALIGNS:
            raise DesignValidationError(
                [("text_attrs", f"text_align must be one of {TEXT_ALIGNS}, got {self.text_align!r}")]
            )


@dataclass(frozen=True)
class ElementContent:
    """What an element shows: an asset reference (image) or a string (text)."""

    modality: str
    payload: str

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise DesignValidationError([("content", f"unknown modality {self.modality!r}")])
        if not self.payload:
            raise DesignValidationError([("content", f"{self.modality} payload must be non-empty")])

    @property
    def prompt_token(self) -> str:
        return IMAGE_PLACEHOLDER if self.modality == IMAGE else self.payload


@dataclass(frozen=True)
class Element:
    id: int
    content: ElementContent
    geom: GeometricAttrs
    text_attrs: TextAttrs | None = None

    def __post_init__(self):
        issues = []
        if self.id < 0:
            issues.append((f"element {self.id}", "id must be >= 0"))
        if (self.content.modality == TEXT) != (self.text_attrs is not None):
            issues.append(
                (f"element {self.id}", "text_attrs must be present exactly when modality is text")
            )
        if issues:
            raise DesignValidationError(issues)

    @property
    def is_text(self) -> bool:
        return self.content.modality == TEXT


@dataclass(frozen=True)
class Design:
    """A canvas plus elements ordered bottom-to-top; ids equal list positions."""

    canvas: Canvas
    elements: tuple[Element, ...]

    def __post_init__(self):
        issues = []
        for pos, el in enumerate(self.elements):
            if el.id != pos:
                issues.append((f"elements[{pos}]", f"id {el.id} must equal list position {pos}"))
        if issues:
            raise DesignValidationError(issues)

    @property
    def n(self) -> int:
        return len(self.elements)

    def element(self, element_id: int) -> Element:
        if not 0 <= element_id < self.n:
            raise DesignValidationError([(f"element {element_id}", "no such element")])
        return self.elements[element_id]

    def with_elements(self, elements: Iterable[Element]) -> "Design":
        """Rebuild the design with ids renumbered to list positions."""
        renumbered = tuple(replace(e, id=i) for i, e in enumerate(elements))
        return Design(canvas=self.canvas, elements=renumbered)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DesignParseError(f"expected an integer, got {value!r}", path)
    if isinstance(value, float) and not value.is_integer():
        raise DesignParseError(f"expected an integer, got {value!r}", path)
    return int(value)


def _as_real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DesignParseError(f"expected a number, got {value!r}", path)
    return float(value)


def _element_from_record(rec: dict, pos: int) -> Element:
    path = f"elements[{pos}]"
    if not isinstance(rec, dict):
        raise DesignParseError("element record must be an object", path)
    modality = rec.get("modality")
    if modality not in MODALITIES:
        raise DesignParseError(f"modality must be one of {MODALITIES}, got {modality!r}", path)
    if modality == TEXT:
        payload = rec.get("content")
        if not isinstance(payload, str) or not payload:
            raise DesignParseError("text element needs a non-empty 'content' string", path)
    else:
        payload = rec.get("asset", rec.get("content"))
        if not isinstance(payload, str) or not payload:
            raise DesignParseError("image element needs a non-empty 'asset' reference", path)

    geom = GeometricAttrs(
        cx=_as_real(rec.get("x"), f"{path}.x"),
        cy=_as_real(rec.get("y"), f"{path}.y"),
        w=_as_real(rec.get("width"), f"{path}.width"),
        h=_as_real(rec.get("height"), f"{path}.height"),
    )
    text_attrs = None
    if modality == TEXT:
        if "font_size" not in rec:
            raise DesignParseError("text element needs 'font_size'", path)
        text_attrs = TextAttrs(
            font_size=_as_real(rec["font_size"], f"{path}.font_size"),
            text_align=rec.get("text_align", "left"),
            angle=_as_real(rec.get("angle", 0), f"{path}.angle"),
        )
    return Element(
        id=pos,
        content=ElementContent(modality=modality, payload=payload),
        geom=geom,
        text_attrs=text_attrs,
    )


def parse_design(raw: str) -> Design:
    """Parse a design document, normalizing element ids to 0..N-1.

    Input list order is layer order and survives normalization. Declared
    ``index`` fields must be unique non-negative integers; they are replaced
    by list positions so downstream ids always equal layer positions.
    """
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DesignParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    if not isinstance(doc, dict):
        raise DesignParseError("document root must be an object")

    canvas_rec = doc.get("canvas")
    if not isinstance(canvas_rec, dict):
        raise DesignParseError("missing 'canvas' object", "$.canvas")
    canvas = Canvas(
        width=_as_int(canvas_rec.get("width"), "$.canvas.width"),
        height=_as_int(canvas_rec.get("height"), "$.canvas.height"),
    )

    records = doc.get("elements")
    if not isinstance(records, list) or not records:
        raise DesignParseError("'elements' must be a non-empty list", "$.elements")

    seen: dict[int, int] = {}
    dupes = []
    for pos, rec in enumerate(records):
        idx = _as_int(rec.get("index"), f"$.elements[{pos}].index") if isinstance(rec, dict) else pos
        if idx < 0:
            raise DesignParseError(f"index must be >= 0, got {idx}", f"$.elements[{pos}].index")
        if idx in seen:
            dupes.append((f"$.elements[{pos}].index", f"duplicate id {idx}"))
        seen[idx] = pos
    if dupes:
        raise DesignValidationError(dupes)

    elements = tuple(_element_from_record(rec, pos) for pos, rec in enumerate(records))
    return Design(canvas=canvas, elements=elements)


def _canonical_number(value: float):
    # Canonical emitter prints integral reals without a decimal point.
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def design_to_document(d: Design) -> dict:
    """Plain-dict form of a design, in the external document schema."""
    elements = []
    for el in d.elements:
        rec: dict[str, Any] = {"index": el.id, "modality": el.content.modality}
        if el.is_text:
            rec["content"] = el.content.payload
        else:
            rec["asset"] = el.content.payload
        rec["x"] = _canonical_number(el.geom.cx)
        rec["y"] = _canonical_number(el.geom.cy)
        rec["width"] = _canonical_number(el.geom.w)
        rec["height"] = _canonical_number(el.geom.h)
        if el.text_attrs is not None:
            rec["angle"] = _canonical_number(el.text_attrs.angle)
            rec["font_size"] = _canonical_number(el.text_attrs.font_size)
            rec["text_align"] = el.text_attrs.text_align
        elements.append(rec)
    return {
        "canvas": {"width": d.canvas.width, "height": d.canvas.height},
        "elements": elements,
    }


def emit_design(d: Design) -> str:
    """Canonical document serialization: sorted keys, integral reals as ints."""
    return json.dumps(design_to_document(d), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize_content_sequence(d: Design) -> str:
    """Render the ELEMENT CONTENT block: indices plus payloads, no geometry.

    Image payloads appear as the literal placeholder token; text payloads
    appear verbatim.
    """
    items = [{"index": el.id, "content": el.content.prompt_token} for el in d.elements]
    return "ELEMENT CONTENT: " + json.dumps(items, separators=(", ", ": "), ensure_ascii=False)


def serialize_canvas(canvas: Canvas) -> str:
    return "CANVAS SIZE: " + json.dumps(
        {"width": canvas.width, "height": canvas.height}, separators=(", ", ": ")
    )


def attribute_record(el: Element) -> dict:
    """Prompt-boundary attribute record with integer-rounded values."""
    rec: dict[str, Any] = {
        "index": el.id,
        "x": round_px(el.geom.cx),
        "y": round_px(el.geom.cy),
        "width": round_px(el.geom.w),
        "height": round_px(el.geom.h),
    }
    if el.text_attrs is not None:
        rec["angle"] = round_px(el.text_attrs.angle)
        rec["font_size"] = round_px(el.text_attrs.font_size)
        rec["text_align"] = el.text_attrs.text_align
    return rec


def format_attribute_records(elements: Iterable[Element]) -> str:
    """Canonical multi-line attribute list: one record per line."""
    lines = [json.dumps(attribute_record(el), separators=(", ", ": "), ensure_ascii=False)
             for el in elements]
    return "[\n" + ",\n".join(lines) + "\n]"


def round_design(d: Design) -> Design:
    """Snap a design to the integer grid used at prompt boundaries.

    Graphs extracted from the rounded design are exactly consistent with the
    integer attribute records emitted for it.
    """
    elements = []
    for el in d.elements:
        geom = GeometricAttrs(
            cx=float(round_px(el.geom.cx)),
            cy=float(round_px(el.geom.cy)),
            w=float(max(1, round_px(el.geom.w))),
            h=float(max(1, round_px(el.geom.h))),
        )
        text_attrs = el.text_attrs
        if text_attrs is not None:
            text_attrs = TextAttrs(
                font_size=float(max(1, round_px(text_attrs.font_size))),
                text_align=text_attrs.text_align,
                angle=float(round_px(text_attrs.angle)),
            )
        elements.append(replace(el, geom=geom, text_attrs=text_attrs))
    return Design(canvas=d.canvas, elements=tuple(elements))


def parse_attribute_records(text: str) -> list[dict]:
    """Parse an attribute list back into plain records (strict JSON)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DesignParseError(f"invalid attribute JSON: {exc.msg}", f"line {exc.lineno}") from exc
    if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
        raise DesignParseError("attribute output must be a list of objects")
    return data
