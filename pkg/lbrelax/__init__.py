# Don't manually change, let setuptools-scm handle it.
__version__ = "0.0.0"

__all__ = [
    # Model
    "Assignment",
    "FeasibilityReport",
    "FractionalAssignment",
    "IlpInstance",
    "RawProblem",
    "RawVariable",
    "Sense",
    "SubProblem",
    "build_lb_ilp",
    "fix_and_project",
    "hamming",
    "is_feasible",
    "local_branching_row",
    "normalize",
    "project",
    # Exceptions
    "InfeasibleIncumbentError",
    "InvalidInstanceError",
    "LbRelaxError",
    "MpsParseError",
    "NoSolutionError",
    "ResultsFormatError",
    # Solvers
    "BnbResult",
    "BnbStatus",
    "LpSolution",
    "LpStatus",
    "SolveBudget",
    "branch_and_bound",
    "brute_force",
    "check_optimality_certificate",
    "find_initial_solution",
    "solve_lp",
    # LNS
    "Heuristic",
    "LnsConfig",
    "LnsState",
    "Neighborhood",
    "RrMode",
    "RunTrace",
    "TraceEvent",
    "destroy_graph",
    "destroy_lb",
    "destroy_lb_relax",
    "destroy_lb_relax_s",
    "destroy_random",
    "run_bnb_baseline",
    "run_lns",
    "step_lb_relax_rr",
    "update_neighborhood_size",
    "update_rr_mode",
    "variable_graph",
    # Generators
    "FAMILY_PRESETS",
    "BaGraph",
    "generate_ba_graph",
    "generate_instance",
    "generate_mis",
    "generate_mk",
    "generate_mvc",
    "generate_sc",
    "independent_set_instance",
    "knapsack_instance",
    "vertex_cover_instance",
    # I/O
    "ResultRecord",
    "parse_instance",
    "parse_mps",
    "read_instance",
    "read_mps",
    "read_results",
    "serialize_instance",
    "write_instance",
    "write_results",
    # Metrics
    "GapSeries",
    "best_performing_rate",
    "default_survival_threshold",
    "gap_at",
    "gap_series",
    "gap_to_virtual_best",
    "primal_gap",
    "primal_integral",
    "summarize",
    "survival_rate",
]

from loguru import logger

from ._config import (
    Heuristic,
    LnsConfig,
)
from ._exact import (
    BnbResult,
    BnbStatus,
    SolveBudget,
    branch_and_bound,
    brute_force,
    find_initial_solution,
)
from ._exceptions import (
    InfeasibleIncumbentError,
    InvalidInstanceError,
    LbRelaxError,
    MpsParseError,
    NoSolutionError,
    ResultsFormatError,
)
from ._gen import (
    FAMILY_PRESETS,
    BaGraph,
    generate_ba_graph,
    generate_instance,
    generate_mis,
    generate_mk,
    generate_mvc,
    generate_sc,
    independent_set_instance,
    knapsack_instance,
    vertex_cover_instance,
)
from ._io import (
    ResultRecord,
    parse_instance,
    parse_mps,
    read_instance,
    read_mps,
    read_results,
    serialize_instance,
    write_instance,
    write_results,
)
from ._lns import (
    LnsState,
    Neighborhood,
    RrMode,
    RunTrace,
    TraceEvent,
    destroy_graph,
    destroy_lb,
    destroy_lb_relax,
    destroy_lb_relax_s,
    destroy_random,
    run_bnb_baseline,
    run_lns,
    step_lb_relax_rr,
    update_neighborhood_size,
    update_rr_mode,
    variable_graph,
)
from ._metrics import (
    GapSeries,
    best_performing_rate,
    default_survival_threshold,
    gap_at,
    gap_series,
    gap_to_virtual_best,
    primal_gap,
    primal_integral,
    summarize,
    survival_rate,
)
from ._model import (
    Assignment,
    FeasibilityReport,
    FractionalAssignment,
    IlpInstance,
    RawProblem,
    RawVariable,
    Sense,
    SubProblem,
    build_lb_ilp,
    fix_and_project,
    hamming,
    is_feasible,
    local_branching_row,
    normalize,
    project,
)
from ._simplex import (
    LpSolution,
    LpStatus,
    check_optimality_certificate,
    solve_lp,
)

# Library code stays silent unless the application opts in.
logger.disable("lbrelax")
