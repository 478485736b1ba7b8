"""curesched: lot sizing and scheduling of tire curing heaters.

Computes minimum-makespan curing schedules under mold, heater, and accessory
constraints, via a randomized multi-start heuristic, an exact integer model
(emitted as LP files and solved by an internal branch and bound or any
conforming external solver), and a hybrid that uses the heuristic makespan to
shrink the model's planning horizon.
"""

from .domain import (
    AssignmentTuple,
    AuxSets,
    FeasibilityReport,
    Instance,
    Mold,
    Part,
    PARTS_GLOBAL,
    PARTS_PER_HEATER,
    Schedule,
    ValidationReport,
    derive_aux_sets,
    schedule_makespan,
    validate_instance,
    validate_schedule,
)
from .errors import (
    AdapterFailure,
    AdapterUnavailable,
    CureschedError,
    Infeasible,
    InfeasibleAssignment,
    NoFeasiblePlacement,
    SolutionParseError,
    UnproduciblePair,
)
from .horizon import MoldPartition, compute_thb, partition_molds
from .heuristic import HeuristicConfig, run_heuristic
from .milp import (
    MilpModel,
    ModelStats,
    build_model,
    check_assignment,
    emit_lp,
    extract_schedule,
    model_stats,
    schedule_to_assignment,
)
from .lpformat import ParsedLp, parse_lp
from .exact import (
    SearchLimits,
    SolveReport,
    SolverAdapter,
    solve_exact,
    solve_with_adapter,
)
from .hop import (
    HopConfig,
    SOLVER_ADAPTER,
    SOLVER_INTERNAL,
    run_baseline_milp,
    run_hop,
)
from .gen import SCENARIOS, ScenarioSpec, generate_instance
from .bench import (
    ModeResult,
    ResultRow,
    cli_main,
    instance_from_json,
    instance_to_json,
    load_instance,
    load_schedule,
    rows_to_csv,
    rows_to_table,
    run_benchmark,
    save_instance,
    save_schedule,
    toy_instance,
)

__all__ = [
    "AssignmentTuple",
    "AuxSets",
    "FeasibilityReport",
    "HeuristicConfig",
    "HopConfig",
    "Instance",
    "MilpModel",
    "ModeResult",
    "ModelStats",
    "Mold",
    "MoldPartition",
    "ParsedLp",
    "Part",
    "PARTS_GLOBAL",
    "PARTS_PER_HEATER",
    "ResultRow",
    "SCENARIOS",
    "ScenarioSpec",
    "Schedule",
    "SearchLimits",
    "SolveReport",
    "SolverAdapter",
    "SOLVER_ADAPTER",
    "SOLVER_INTERNAL",
    "ValidationReport",
    "AdapterFailure",
    "AdapterUnavailable",
    "CureschedError",
    "Infeasible",
    "InfeasibleAssignment",
    "NoFeasiblePlacement",
    "SolutionParseError",
    "UnproduciblePair",
    "build_model",
    "check_assignment",
    "cli_main",
    "compute_thb",
    "derive_aux_sets",
    "emit_lp",
    "extract_schedule",
    "generate_instance",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "load_schedule",
    "model_stats",
    "parse_lp",
    "partition_molds",
    "rows_to_csv",
    "rows_to_table",
    "run_baseline_milp",
    "run_benchmark",
    "run_heuristic",
    "run_hop",
    "save_instance",
    "save_schedule",
    "schedule_makespan",
    "schedule_to_assignment",
    "solve_exact",
    "solve_with_adapter",
    "toy_instance",
    "validate_instance",
    "validate_schedule",
]

__version__ = "0.1.0"
