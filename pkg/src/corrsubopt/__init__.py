"""Correlation subgraph optimisation toolkit.

Scores spanning subgraphs of vertex-weighted graphs by a degree/discrepancy
trade-off, searches for high-scoring subgraphs exactly and heuristically,
and compiles one-in-three satisfiability formulas into instances whose
optimum separates satisfiable from unsatisfiable inputs.
"""

from .graph import (
    GraphParseError,
    MaskValidityError,
    SubgraphMask,
    WeightedGraph,
    dump_graph,
    dump_mask,
    forced_edges,
    is_valid,
    load_graph,
    load_mask,
)
from .reduction import (
    AssignmentError,
    DecisionReport,
    Formula,
    FormulaError,
    IncidenceBoundWarning,
    ReductionInstance,
    compile_formula,
    decide,
    dump_formula,
    is_one_in_three,
    parse_assignment,
    parse_formula,
    satisfying_assignments,
    witness_mask,
)
from .scoring import (
    DegenerateVertexError,
    ScoreState,
    ScoreValue,
    compare_scores,
    format_fraction,
    format_score,
    neighbourhood_discrepancy,
    score,
    score_delta,
)
from .solvers import (
    SearchSpaceError,
    SolveReport,
    random_valid_mask,
    solve_exact,
    solve_local,
)
from .verification import CheckRecord, find_low_discrepancy_mask, run_checks

__version__ = "0.1.0"

__all__ = [
    "AssignmentError",
    "CheckRecord",
    "DecisionReport",
    "DegenerateVertexError",
    "Formula",
    "FormulaError",
    "GraphParseError",
    "IncidenceBoundWarning",
    "MaskValidityError",
    "ReductionInstance",
    "ScoreState",
    "ScoreValue",
    "SearchSpaceError",
    "SolveReport",
    "SubgraphMask",
    "WeightedGraph",
    "compare_scores",
    "compile_formula",
    "decide",
    "dump_formula",
    "dump_graph",
    "dump_mask",
    "find_low_discrepancy_mask",
    "forced_edges",
    "format_fraction",
    "format_score",
    "is_one_in_three",
    "is_valid",
    "load_graph",
    "load_mask",
    "neighbourhood_discrepancy",
    "parse_assignment",
    "parse_formula",
    "random_valid_mask",
    "run_checks",
    "satisfying_assignments",
    "score",
    "score_delta",
    "solve_exact",
    "solve_local",
    "witness_mask",
    "__version__",
]
