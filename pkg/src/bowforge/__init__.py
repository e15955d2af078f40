"""Toolkit for cyclic brane diagrams: decision procedure, certificates, solvers."""

from .branes import (
    Brane,
    BraneLedger,
    brane_coverage,
    brane_is_fixed,
    check_ledger,
    coverage,
    ledger_apply_move,
    ledger_from_json,
    ledger_is_susy,
    ledger_to_json,
    synthesize,
    synthesize_finite,
)
from .diagram import (
    BowDiagram,
    CutAt,
    Direction,
    HwMove,
    IncrementArrows,
    IncrementX,
    Node,
    NodeKind,
    SeparatedForm,
    SubtractArrowArc,
    arc_segments,
    diagram_from_json,
    diagram_to_json,
    log_from_json,
    log_to_json,
    parse_diagram,
    render_diagram,
    s_dual,
    separated_view,
    validate,
)
from .momentmap import (
    ArrowData,
    Solution,
    StabilityReport,
    TriangleData,
    XStability,
    construct_solution,
    extend_increment,
    moment_residual,
    residual_blocks,
    solution_from_json,
    solution_to_json,
    solve_numeric,
    stability_check,
    stability_report,
    transport_hw_solution,
    zero_solution,
)
from .rewrite import (
    EquivClassSample,
    NegativeWitness,
    apply_entry,
    apply_hw,
    apply_increment,
    canonical_encoding,
    enumerate_equivalent,
    legal_swaps,
    normalize_gap,
    replay,
    separate,
)
from .susy import (
    Certificate,
    FiniteCheckPassed,
    InequalityViolation,
    TrivialNoNodes,
    certificate_to_json,
    check_finite_separated,
    decide_supersymmetry,
    reduce_to_finite,
    subtract_arrow_arc,
    susy_bound,
    witness_to_json,
)
from .weights import (
    AffineWeight,
    BalancedForm,
    WeightTriple,
    balanced_form,
    dominance_ge,
    is_gyd,
    separated_triple,
    stratum_check_affine,
    stratum_check_finite,
    transpose_gyd,
    transpose_weight,
)

__all__ = [
    "AffineWeight",
    "ArrowData",
    "BalancedForm",
    "BowDiagram",
    "Brane",
    "BraneLedger",
    "Certificate",
    "CutAt",
    "Direction",
    "EquivClassSample",
    "FiniteCheckPassed",
    "HwMove",
    "IncrementArrows",
    "IncrementX",
    "InequalityViolation",
    "NegativeWitness",
    "Node",
    "NodeKind",
    "SeparatedForm",
    "Solution",
    "StabilityReport",
    "SubtractArrowArc",
    "TriangleData",
    "TrivialNoNodes",
    "WeightTriple",
    "XStability",
    "apply_entry",
    "apply_hw",
    "apply_increment",
    "arc_segments",
    "balanced_form",
    "brane_coverage",
    "brane_is_fixed",
    "canonical_encoding",
    "certificate_to_json",
    "check_finite_separated",
    "check_ledger",
    "construct_solution",
    "coverage",
    "decide_supersymmetry",
    "diagram_from_json",
    "diagram_to_json",
    "dominance_ge",
    "enumerate_equivalent",
    "extend_increment",
    "is_gyd",
    "ledger_apply_move",
    "ledger_from_json",
    "ledger_is_susy",
    "ledger_to_json",
    "legal_swaps",
    "log_from_json",
    "log_to_json",
    "moment_residual",
    "normalize_gap",
    "parse_diagram",
    "reduce_to_finite",
    "render_diagram",
    "replay",
    "residual_blocks",
    "s_dual",
    "separate",
    "separated_triple",
    "separated_view",
    "solution_from_json",
    "solution_to_json",
    "solve_numeric",
    "stability_check",
    "stability_report",
    "stratum_check_affine",
    "stratum_check_finite",
    "subtract_arrow_arc",
    "susy_bound",
    "synthesize",
    "synthesize_finite",
    "transpose_gyd",
    "transpose_weight",
    "transport_hw_solution",
    "validate",
    "witness_to_json",
    "zero_solution",
]
