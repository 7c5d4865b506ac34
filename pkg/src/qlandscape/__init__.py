"""Loss-landscape analysis for two-parameter shared-rotation circuits:
exact simulation, analytic gradients, periodic grid sampling, descent
reachability labeling, and multi-start optimizer benchmarks."""

from .circuit import (
    DOMAIN_MAX,
    CircuitSpec,
    GateOp,
    StateVector,
    apply_gate,
    batch_evaluate,
    build_default_circuit,
    evaluate,
    evaluate_dense_oracle,
)
from .deceptiveness import (
    DEFAULT_TOL,
    DEFAULT_TOL_G,
    DeceptivenessResult,
    deceptiveness_mask,
    deceptiveness_ratio,
    read_mask,
    resolution_stability_report,
    write_mask,
)
from .formats import FormatError
from .gradients import (
    batch_loss_and_gradient,
    finite_difference_gradient,
    loss_and_gradient,
    parameter_shift_gradient,
)
from .landscape import (
    GradientStats,
    GroundTruth,
    LandscapeGrid,
    global_minimum,
    gradient_magnitude_stats,
    grid_axis,
    grid_digest,
    read_grid,
    sample_default_grid,
    sample_grid,
    write_grid,
)
from .optimizers import (
    BENCHMARK_LEARNING_RATES,
    CSV_COLUMNS,
    GENERATOR_ID,
    AdamState,
    DistStats,
    ExperimentSummary,
    GroupSummary,
    OptimizerConfig,
    RunRecord,
    adam_step,
    experiment_manifest,
    multi_start_experiment,
    run_optimization,
    sample_starts,
    sgd_step,
    success_summary,
    write_records_csv,
)

__version__ = "0.1.0"

__all__ = [
    "DOMAIN_MAX",
    "DEFAULT_TOL",
    "DEFAULT_TOL_G",
    "BENCHMARK_LEARNING_RATES",
    "CSV_COLUMNS",
    "GENERATOR_ID",
    "AdamState",
    "CircuitSpec",
    "DeceptivenessResult",
    "DistStats",
    "ExperimentSummary",
    "FormatError",
    "GateOp",
    "GradientStats",
    "GroundTruth",
    "GroupSummary",
    "LandscapeGrid",
    "OptimizerConfig",
    "RunRecord",
    "StateVector",
    "adam_step",
    "apply_gate",
    "batch_evaluate",
    "batch_loss_and_gradient",
    "build_default_circuit",
    "deceptiveness_mask",
    "deceptiveness_ratio",
    "evaluate",
    "evaluate_dense_oracle",
    "experiment_manifest",
    "finite_difference_gradient",
    "global_minimum",
    "gradient_magnitude_stats",
    "grid_axis",
    "grid_digest",
    "loss_and_gradient",
    "multi_start_experiment",
    "parameter_shift_gradient",
    "read_grid",
    "read_mask",
    "resolution_stability_report",
    "run_optimization",
    "sample_default_grid",
    "sample_grid",
    "sample_starts",
    "sgd_step",
    "success_summary",
    "write_grid",
    "write_mask",
    "write_records_csv",
]
