"""Structure-preserving design layout editing engine and evaluation workbench.

Core pipeline: parse a design, extract its relation graph, synthesize or
accept a standardized editing operation, execute it through a backend that
keeps the unedited layout structure intact, and score the result.
"""

from .model import (
    Canvas,
    Design,
    Element,
    ElementContent,
    GeometricAttrs,
    Rect,
    TextAttrs,
    bounding_box,
    emit_design,
    parse_design,
    serialize_content_sequence,
)
from .relations import (
    CANVAS_NODE,
    Edge,
    PositionRelation,
    RelationGraph,
    SizeRelation,
    build_relation_graph,
    classify_position_canvas,
    classify_position_element,
    classify_size,
    remove_node_edges,
    serialize_graph,
)
from .ops import (
    CompositeOperation,
    EditOperation,
    PreparedEdit,
    compose,
    parse_operation,
    print_operation,
    synthesize_generalization_op,
    synthesize_reconstruction_op,
)
from .datagen import CorpusConfig, RadrSample, build_radr_sample, emit_corpus, filter_corpus
from .solver import (
    ConstraintResiduals,
    NewElementSpec,
    SolverConfig,
    apply_operation_exact,
    place_new_element,
    residuals,
    solve,
)
from .metrics import (
    EvalCase,
    EvalReport,
    alignment,
    evaluate_corpus,
    op_satisfaction,
    overlap,
    relation_satisfaction,
)
from .backends import (
    CannedClient,
    ExternalModelBackend,
    HttpChatClient,
    SolverBackend,
    build_prompt,
    edit_via_backend,
    parse_model_output,
    translate_instruction,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
