"""Shared test utilities: random design factory and independent oracles.

The oracles deliberately re-derive expected answers by different means than
the implementation (interval tables, explicit pair enumeration, plain
arithmetic), so they can vouch for it.
"""

from __future__ import annotations

import random

from layoutedit.model import (
    Canvas,
    Design,
    Element,
    ElementContent,
    GeometricAttrs,
    TextAttrs,
)

WORDS = ("SALE", "Fresh juice", "Join us today", "25% OFF", "New arrivals", "hello world")


def make_random_design(rng: random.Random, n: int, cw: int = 1000, ch: int = 800,
                       text_prob: float = 0.3) -> Design:
    elements = []
    for i in range(n):
        w = rng.uniform(30, cw * 0.8)
        h = rng.uniform(20, ch * 0.8)
        cx = rng.uniform(0, cw)
        cy = rng.uniform(0, ch)
        geom = GeometricAttrs(cx, cy, w, h)
        if rng.random() < text_prob:
            elements.append(
                Element(
                    i,
                    ElementContent("text", WORDS[rng.randrange(len(WORDS))]),
                    geom,
                    TextAttrs(
                        font_size=rng.uniform(8, 90),
                        text_align=("left", "center", "right")[rng.randrange(3)],
                    ),
                )
            )
        else:
            elements.append(Element(i, ElementContent("image", f"asset-{i}.png"), geom))
    return Design(Canvas(cw, ch), tuple(elements))


def make_boxes_design(canvas: tuple[int, int], boxes: list[tuple[float, float, float, float]]) -> Design:
    """Quick image-only design from (cx, cy, w, h) tuples."""
    elements = tuple(
        Element(i, ElementContent("image", f"box-{i}.png"), GeometricAttrs(*box))
        for i, box in enumerate(boxes)
    )
    return Design(Canvas(*canvas), elements)


# --- independent oracles -----------------------------------------------------

# Nine regions as explicit half-open interval pairs; None means unbounded.
_REGION_TABLE = (
    ("top-left", (None, "lo"), (None, "lo")),
    ("top", ("lo", "hi"), (None, "lo")),
    ("top-right", ("hi", None), (None, "lo")),
    ("left", (None, "lo"), ("lo", "hi")),
    ("center", ("lo", "hi"), ("lo", "hi")),
    ("right", ("hi", None), ("lo", "hi")),
    ("bottom-left", (None, "lo"), ("hi", None)),
    ("bottom", ("lo", "hi"), ("hi", None)),
    ("bottom-right", ("hi", None), ("hi", None)),
)


def _in_band(v: float, band: tuple, lo: float, hi: float) -> bool:
    bounds = {"lo": lo, "hi": hi, None: None}
    low, high = bounds[band[0]], bounds[band[1]]
    if low is not None and v < low:
        return False
    if high is not None and v >= high:
        return False
    return True


def region_scan_label(cx: float, cy: float, x_lo: float, x_hi: float,
                      y_lo: float, y_hi: float) -> str:
    """Scan all nine candidate regions and return the single one containing
    the point (errors if the regions fail to partition the plane)."""
    hits = [
        name
        for name, x_band, y_band in _REGION_TABLE
        if _in_band(cx, x_band, x_lo, x_hi) and _in_band(cy, y_band, y_lo, y_hi)
    ]
    assert len(hits) == 1, f"point ({cx}, {cy}) hit regions {hits}"
    return hits[0]


def size_label_oracle(w1: float, h1: float, w2: float, h2: float, alpha: float) -> str:
    ratio = (w1 * h1) / (w2 * h2)
    if ratio < 1 - alpha:
        return "small"
    if ratio > 1 + alpha:
        return "large"
    return "equal"


def enumerate_expected_pairs(n: int) -> set[frozenset]:
    return {frozenset((i, j)) for i in range(n) for j in range(i + 1, n)}
