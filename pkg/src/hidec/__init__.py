"""hidec: run and analyze hierarchical declarative process models.

Activities are constrained by declarative templates compiled to finite
acceptors; complex activities open isolated sub-process instances whose
life-cycle is the only channel back to the parent. On top of the engine sit
bounded language enumeration, equivalence checking, sub-process extraction
with constraint aggregation, and verified inlining.
"""

from .analysis import (
    BoundaryAggregate,
    BoundedLanguage,
    BoundExceeded,
    EquivalenceResult,
    ExtractionInfeasible,
    ExtractionReport,
    InlineResult,
    bounded_equivalent,
    check_extraction,
    enumerate_language,
    extract_subprocess,
    inline_subprocess,
    leaf_witness,
)
from .automata import (
    CompilationError,
    ConstraintAutomaton,
    TemplateClassification,
    TraceInputError,
    classify_template,
    compile_constraint,
    evaluate_trace,
)
from .dsl import (
    ParseDiagnostic,
    ParseError,
    load_model,
    load_trace,
    parse_model,
    parse_trace,
    serialize_model,
)
from .engine import (
    CommandRejected,
    Event,
    Instance,
    ReplayVerdict,
    TraceStep,
    instantiate,
    replay,
    restore,
)
from .model import (
    ActivityDecl,
    ConstraintInstance,
    Document,
    ProcessModel,
    Violation,
    WellFormednessReport,
    alphabet,
    leaf_alphabet,
    structurally_equal,
    validate_document,
)

__version__ = "0.1.0"
