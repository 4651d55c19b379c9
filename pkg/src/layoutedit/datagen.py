"""Self-supervised corpus generation: design reconstruction tuples.

Each sample pairs a prompt-formatted input (canvas size, element content,
relation blocks, one synthesized editing operation) with the design's own
attributes as the output. Reconstruction draws carry the output; the
generalization setting has no ground truth, so its records have a null
output. Records are emitted as line-delimited JSON.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Iterator

from .errors import SynthesisError
from .model import (
    Design,
    Element,
    format_attribute_records,
    round_design,
    serialize_canvas,
    serialize_content_sequence,
)
from .ops import (
    RECONSTRUCTION,
    SETTINGS,
    PreparedEdit,
    derive_seed,
    print_operation,
    synthesize_op,
)
from .relations import serialize_graph

INPUT_BLOCK_ORDER = (
    "CANVAS SIZE",
    "ELEMENT CONTENT",
    "SIZE RELATIONSHIP",
    "POSITION RELATIONSHIP",
    "EDITING OPERATION",
)


@dataclass(frozen=True)
class CorpusConfig:
    alpha: float = 0.1
    max_elements: int = 25
    samples_per_design: int = 1
    seed: int = 0
    setting: str = RECONSTRUCTION

    def __post_init__(self):
        if self.max_elements < 1:
            raise SynthesisError("max_elements must be >= 1")
        if self.samples_per_design < 1:
            raise SynthesisError("samples_per_design must be >= 1")
        if self.setting not in SETTINGS:
            raise SynthesisError(f"unknown setting {self.setting!r}")


@dataclass(frozen=True)
class RadrSample:
    input_text: str
    output_text: str | None
    meta: dict

    def to_record(self) -> dict:
        return {"input": self.input_text, "output": self.output_text, "meta": self.meta}


def render_radr_input(prep: PreparedEdit) -> str:
    """Assemble the prompt input blocks in their fixed order."""
    return "\n".join(
        (
            serialize_canvas(prep.design.canvas),
            serialize_content_sequence(prep.design),
            serialize_graph(prep.graph),
            "EDITING OPERATION: " + print_operation(prep.operation),
        )
    )


def build_radr_sample(
    d: Design,
    cfg: CorpusConfig,
    donor_pool: list[Element],
    seed: int,
    design_id: int | str = 0,
) -> RadrSample:
    """One training/evaluation tuple for one seeded draw.

    The design is snapped to the integer grid first: prompts carry rounded
    attributes, so the relation blocks must be extracted from exactly what the
    output records will say.
    """
    if d.n > cfg.max_elements:
        raise SynthesisError(f"design has {d.n} elements, above the limit of {cfg.max_elements}")
    prep = synthesize_op(round_design(d), donor_pool, seed, cfg.setting, cfg.alpha)
    output = None
    if prep.ground_truth is not None:
        output = format_attribute_records(prep.ground_truth.elements)
    return RadrSample(
        input_text=render_radr_input(prep),
        output_text=output,
        meta={
            "design": design_id,
            "action": prep.operation.action,
            "target": prep.operation.target,
            "seed": seed,
            "alpha": cfg.alpha,
            "setting": cfg.setting,
        },
    )


def filter_corpus(designs: Iterable[Design], max_elements: int = 25) -> Iterator[Design]:
    """Keep designs with at most ``max_elements`` elements, preserving order."""
    for d in designs:
        if d.n <= max_elements:
            yield d


@dataclass
class CorpusStats:
    n_designs_in: int = 0
    n_designs_filtered: int = 0
    n_samples: int = 0
    action_counts: dict = field(default_factory=dict)
    element_count_hist: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["element_count_hist"] = {str(k): v for k, v in sorted(self.element_count_hist.items())}
        d["action_counts"] = dict(sorted(self.action_counts.items()))
        return d


def _default_donor_pool(designs: list[Design], exclude: int) -> list[Element]:
    """Donors drawn from every design but the current one (held-out style)."""
    pool = [el for i, d in enumerate(designs) if i != exclude for el in d.elements]
    if not pool:  # single-design corpus: fall back to the design itself
        pool = list(designs[exclude].elements)
    return pool


def generate_corpus(
    designs: Iterable[Design],
    cfg: CorpusConfig,
    donor_pool: list[Element] | None = None,
) -> tuple[list[RadrSample], CorpusStats]:
    """Materialize all samples for a design stream, deterministically.

    Per-sample seeds derive from (cfg.seed, design position, draw index), so
    the same inputs always produce byte-identical corpora. Designs above the
    element limit are counted and skipped.
    """
    stats = CorpusStats()
    kept: list[Design] = []
    positions: list[int] = []
    for pos, d in enumerate(designs):
        stats.n_designs_in += 1
        if d.n > cfg.max_elements:
            stats.n_designs_filtered += 1
            continue
        kept.append(d)
        positions.append(pos)

    samples: list[RadrSample] = []
    for idx, (pos, d) in enumerate(zip(positions, kept)):
        pool = donor_pool if donor_pool is not None else _default_donor_pool(kept, idx)
        stats.element_count_hist[d.n] = stats.element_count_hist.get(d.n, 0) + 1
        for draw in range(cfg.samples_per_design):
            seed = derive_seed(cfg.seed, pos, draw)
            sample = build_radr_sample(d, cfg, pool, seed, design_id=pos)
            samples.append(sample)
            action = sample.meta["action"]
            stats.action_counts[action] = stats.action_counts.get(action, 0) + 1
            stats.n_samples += 1
    return samples, stats


def emit_corpus(
    designs: Iterable[Design],
    cfg: CorpusConfig,
    out: IO[str],
    donor_pool: list[Element] | None = None,
) -> CorpusStats:
    """Write one JSON record per line to ``out`` and return corpus statistics."""
    samples, stats = generate_corpus(designs, cfg, donor_pool)
    for sample in samples:
        try:
            out.write(json.dumps(sample.to_record(), ensure_ascii=False) + "\n")
        except OSError as exc:
            raise SynthesisError(
                f"failed to write record for design {sample.meta['design']}: {exc}"
            ) from exc
    return stats


def read_corpus(lines: Iterable[str]) -> Iterator[RadrSample]:
    for line in lines:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        yield RadrSample(rec["input"], rec.get("output"), rec.get("meta", {}))


def donor_elements(designs: Iterable[Design]) -> list[Element]:
    """Flatten a design split into a donor element pool."""
    return [el for d in designs for el in d.elements]
