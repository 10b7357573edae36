"""Exact algorithms for maximum connectivity improvement on directed acyclic graphs."""

from .errors import CycleError, GraphFormatError, MCIError, PreconditionError, SolverGuardError
from .graph import (
    Classification,
    Dag,
    Digraph,
    ReachabilityMatrix,
    classify,
    count_pairs,
    format_graph,
    is_strongly_connected,
    parse_graph,
    reach_sets,
    transpose,
)
from .solvers import (
    SolveOutcome,
    augment_strongly_connected,
    brute_force,
    solve,
    solve_by_matching,
    solve_by_st,
    solve_by_v_minus_b,
    solve_large_budget,
)
from .structure import (
    Solution,
    max_matching,
    minimal_representatives,
    neighborhood_classes,
    normalize_solution,
    verify_class_bound,
)

__all__ = [
    "Classification", "CycleError", "Dag", "Digraph", "GraphFormatError", "MCIError",
    "PreconditionError", "ReachabilityMatrix", "Solution", "SolveOutcome", "SolverGuardError",
    "augment_strongly_connected", "brute_force", "classify", "count_pairs", "format_graph",
    "is_strongly_connected", "max_matching", "minimal_representatives", "neighborhood_classes",
    "normalize_solution", "parse_graph", "reach_sets", "solve", "solve_by_matching",
    "solve_by_st", "solve_by_v_minus_b", "solve_large_budget", "transpose", "verify_class_bound",
]
