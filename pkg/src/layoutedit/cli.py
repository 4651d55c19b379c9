"""Batch command-line entry points over the engine.

Exit codes: 0 success, 1 domain error, 2 usage error. Stochastic commands
take an explicit --seed so runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .backends import (
    CannedClient,
    ExternalModelBackend,
    HttpChatClient,
    SolverBackend,
    edit_via_backend,
)
from .datagen import CorpusConfig, build_radr_sample, donor_elements, emit_corpus
from .errors import LayoutEditError
from .metrics import EvalCase, evaluate_corpus
from .model import Design, emit_design, parse_design
from .ops import EditOperation, derive_seed, operation_from_record, parse_operation
from .relations import build_relation_graph, remove_node_edges, serialize_graph
from .solver import NewElementSpec, SolverConfig
from .model import ElementContent, GeometricAttrs, TextAttrs


def _read_design(path: str) -> Design:
    return parse_design(Path(path).read_text(encoding="utf-8"))


def _read_designs(path: str) -> list[Design]:
    """A corpus source: a directory of *.json designs, a .jsonl stream, or a
    single design document."""
    p = Path(path)
    if p.is_dir():
        return [_read_design(str(f)) for f in sorted(p.glob("*.json"))]
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".jsonl":
        return [parse_design(line) for line in text.splitlines() if line.strip()]
    return [parse_design(text)]


def _parse_op(value) -> EditOperation:
    """Accept the canonical grammar string or the structured JSON form."""
    if isinstance(value, dict):
        return operation_from_record(value)
    text = value.strip()
    if text.startswith("{"):
        try:
            return operation_from_record(json.loads(text))
        except json.JSONDecodeError as exc:
            raise LayoutEditError(f"structured operation is not valid JSON: {exc.msg}") from exc
    return parse_operation(text)


def _chat_client():
    fixtures = os.environ.get("LAYOUTEDIT_MODEL_FIXTURES")
    if fixtures:
        return CannedClient.from_fixture(fixtures)
    config = os.environ.get("LAYOUTEDIT_MODEL_CONFIG")
    if config:
        return HttpChatClient.from_file(config)
    return None


def _backend(kind: str, cfg: SolverConfig):
    if kind == "solver":
        return SolverBackend(cfg=cfg)
    client = _chat_client()
    if client is None:
        raise LayoutEditError(
            "model backend requires LAYOUTEDIT_MODEL_CONFIG or LAYOUTEDIT_MODEL_FIXTURES"
        )
    return ExternalModelBackend(client=client, cfg=cfg)


def _new_element_from_flag(flag: str | None) -> NewElementSpec | None:
    """--add-element format: JSON with modality/content/asset and optional
    width/height/x/y/font_size/text_align."""
    if not flag:
        return None
    try:
        rec = json.loads(flag)
    except json.JSONDecodeError as exc:
        raise LayoutEditError(f"--add-element is not valid JSON: {exc.msg}") from exc
    modality = rec.get("modality")
    payload = rec.get("content") if modality == "text" else rec.get("asset", rec.get("content"))
    content = ElementContent(modality=modality, payload=payload)
    text_attrs = None
    if modality == "text":
        text_attrs = TextAttrs(
            font_size=rec.get("font_size", 24.0),
            text_align=rec.get("text_align", "left"),
            angle=rec.get("angle", 0.0),
        )
    geom = None
    if all(k in rec for k in ("x", "y", "width", "height")):
        geom = GeometricAttrs(rec["x"], rec["y"], rec["width"], rec["height"])
    size_hint = (rec["width"], rec["height"]) if "width" in rec and "height" in rec else None
    return NewElementSpec(content=content, text_attrs=text_attrs, size_hint=size_hint, geom=geom)


def cmd_extract_graph(args) -> int:
    design = _read_design(args.infile)
    graph = build_relation_graph(design, args.alpha, seed=args.seed)
    print(serialize_graph(graph))
    if args.json:
        from .relations import graph_to_records

        print(json.dumps(graph_to_records(graph)))
    return 0


def cmd_synth_op(args) -> int:
    design = _read_design(args.infile)
    donors = donor_elements(_read_designs(args.donors)) if args.donors else list(design.elements)
    cfg = CorpusConfig(alpha=args.alpha, setting=args.setting, seed=args.seed)
    sample = build_radr_sample(design, cfg, donors, args.seed, design_id=args.infile)
    print(json.dumps(sample.to_record(), ensure_ascii=False, indent=2))
    return 0


def cmd_edit(args) -> int:
    design = _read_design(args.infile)
    op = _parse_op(args.op)
    cfg = SolverConfig(alpha=args.alpha, seed=args.seed)
    graph = build_relation_graph(design, args.alpha, seed=args.seed)
    if op.target in graph.nodes:
        graph = remove_node_edges(graph, op.target)
    backend = _backend(args.backend, cfg)
    edited, diag = edit_via_backend(
        backend, design, graph, op, new_element=_new_element_from_flag(args.add_element)
    )
    text = emit_design(edited)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(
        f"op={diag.op_satisfied} size_rel={diag.size_rel:.4f} pos_rel={diag.pos_rel:.4f}",
        file=sys.stderr,
    )
    return 0


def cmd_datagen(args) -> int:
    designs = _read_designs(args.corpus)
    donors = donor_elements(_read_designs(args.donors)) if args.donors else None
    cfg = CorpusConfig(
        alpha=args.alpha,
        max_elements=args.max_elements,
        samples_per_design=args.samples_per_design,
        seed=args.seed,
        setting=args.setting,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        stats = emit_corpus(designs, cfg, fh, donor_pool=donors)
    stats_text = json.dumps(stats.to_dict(), indent=2)
    if args.stats:
        Path(args.stats).write_text(stats_text + "\n", encoding="utf-8")
    print(stats_text, file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    cfg = SolverConfig(alpha=args.alpha, seed=args.seed)
    backend = _backend(args.backend, cfg)
    cases = []
    n_failed = 0
    for idx, line in enumerate(Path(args.cases).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LayoutEditError(f"cases line {idx + 1} is not valid JSON: {exc.msg}") from exc
        design = parse_design(json.dumps(raw["design"]))
        op = _parse_op(raw["op"])
        graph = build_relation_graph(design, args.alpha, seed=derive_seed(args.seed, idx))
        if op.target in graph.nodes:
            graph = remove_node_edges(graph, op.target)
        spec = None
        if raw.get("new_element"):
            spec = _new_element_from_flag(json.dumps(raw["new_element"]))
        try:
            edited, _ = edit_via_backend(backend, design, graph, op, new_element=spec)
            cases.append(EvalCase(design, graph, op, edited))
        except LayoutEditError:
            n_failed += 1
    report = evaluate_corpus(cases, args.alpha, args.tol)
    report.n_errors += n_failed
    print(report.to_table())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        args.store,
        chat_client=_chat_client(),
        solver_cfg=SolverConfig(alpha=args.alpha),
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layoutedit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-graph", help="print the relation graph of a design")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", action="store_true", help="also print the machine-readable dump")
    p.set_defaults(func=cmd_extract_graph)

    p = sub.add_parser("synth-op", help="synthesize one prepared editing operation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--setting", choices=("reconstruction", "generalization"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--donors", help="design(s) supplying donor elements")
    p.set_defaults(func=cmd_synth_op)

    p = sub.add_parser("edit", help="apply one operation to a design document")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--op", required=True, help='e.g. \'move element 3 to {"x": 583, "y": 394}\'')
    p.add_argument("--backend", choices=("solver", "model"), default="solver")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the edited document here instead of stdout")
    p.add_argument("--add-element", help="JSON spec of the element an add op introduces")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("datagen", help="emit a line-delimited reconstruction corpus")
    p.add_argument("--corpus", required=True, help="design dir, .jsonl stream, or single doc")
    p.add_argument("--out", required=True)
    p.add_argument("--setting", choices=("reconstruction", "generalization"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--max-elements", type=int, default=25)
    p.add_argument("--samples-per-design", type=int, default=2)
    p.add_argument("--donors", help="held-out design split for donor elements")
    p.add_argument("--stats", help="write corpus statistics to this file")
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("eval", help="run a backend over a cases file and print the report")
    p.add_argument("--cases", required=True, help="JSONL of {design, op, new_element?}")
    p.add_argument("--backend", choices=("solver", "model"), default="solver")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the structured report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--store", default="./layoutedit-store")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--ui", help="serve a static UI build from this directory at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LayoutEditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
