import json

import pytest

from layoutedit import parse_design

# Worked example: 940x788 canvas, three images plus one text element.
APPENDIX_DOCUMENT = json.dumps(
    {
        "canvas": {"width": 940, "height": 788},
        "elements": [
            {"index": 0, "modality": "image", "asset": "background.png",
             "x": 470, "y": 394, "width": 940, "height": 806},
            {"index": 1, "modality": "image", "asset": "photo.png",
             "x": 470, "y": 394, "width": 873, "height": 721},
            {"index": 2, "modality": "image", "asset": "badge.png",
             "x": 598, "y": 147, "width": 443, "height": 418},
            {"index": 3, "modality": "text", "content": "STOP DREAMING START DOING",
             "x": 583, "y": 394, "width": 441, "height": 336,
             "angle": 0, "font_size": 70, "text_align": "left"},
        ],
    },
    indent=2,
)

# Seed whose dedup coin flips reproduce the reference edge directions
# (0 large 1, 2 small 1, 1 center 0) on the document above.
GOLDEN_GRAPH_SEED = 1

APPENDIX_OUTPUT_BLOCK = (
    "[\n"
    '{"index": 0, "x": 470, "y": 394, "width": 940, "height": 806},\n'
    '{"index": 1, "x": 470, "y": 394, "width": 873, "height": 721},\n'
    '{"index": 2, "x": 598, "y": 147, "width": 443, "height": 418},\n'
    '{"index": 3, "x": 583, "y": 394, "width": 441, "height": 336, '
    '"angle": 0, "font_size": 70, "text_align": "left"}\n'
    "]"
)


@pytest.fixture
def appendix_document() -> str:
    return APPENDIX_DOCUMENT


@pytest.fixture
def appendix_design():
    return parse_design(APPENDIX_DOCUMENT)
