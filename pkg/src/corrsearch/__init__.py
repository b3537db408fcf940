"""Global optimization over correlation matrices via angular coordinates.

The package parameterizes the correlation matrices of dimension d by the
d(d-1)/2 angles of a unit-row Cholesky factor, pulls objectives back to
that unconstrained space, and minimizes them with a restarted pattern
search.  On top of the engine sit penalized sparse correlation and
covariance estimation (SCAD, MCP, lasso penalties), simulation designs
with support-recovery metrics, and classical test functions adapted to
the correlation domain.
"""

from .corrspace import (
    CorrelationError,
    angles_to_cholesky,
    angles_to_corr,
    corr_to_angles,
    dim_from_num_angles,
    flat_index,
    num_angles,
    random_angles,
    random_corr,
    rowcol_of,
    validate_corr,
    wrap_angles,
)
from .penalty import PenaltySpec, penalty_derivative, penalty_sum, penalty_value, validate_mask
from .objective import (
    INFEASIBLE,
    BlackBoxCommand,
    LossSpec,
    ObjectiveSpec,
    loss_value,
    make_pullback,
    objective_value,
)
from .search import (
    EvaluationError,
    OptimizerConfig,
    RunResult,
    optimize,
    poll_candidates,
    stationarity_check,
)
from .estimate import EstimateResult, estimate, recover_sigma, sample_moments
from .datagen import (
    DESIGNS,
    MetricsReport,
    TruthSpec,
    compute_metrics,
    gen_truth,
    sample_mvn,
    simulate,
    support_of,
)
from .benchmarks import (
    FUNCTIONS,
    BenchmarkResult,
    BenchmarkSpec,
    bench_pullback,
    bench_value,
    offdiag_vector,
    run_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkResult",
    "BenchmarkSpec",
    "BlackBoxCommand",
    "CorrelationError",
    "DESIGNS",
    "EstimateResult",
    "EvaluationError",
    "FUNCTIONS",
    "INFEASIBLE",
    "LossSpec",
    "MetricsReport",
    "ObjectiveSpec",
    "OptimizerConfig",
    "PenaltySpec",
    "RunResult",
    "TruthSpec",
    "angles_to_cholesky",
    "angles_to_corr",
    "bench_pullback",
    "bench_value",
    "compute_metrics",
    "corr_to_angles",
    "dim_from_num_angles",
    "estimate",
    "flat_index",
    "gen_truth",
    "loss_value",
    "make_pullback",
    "num_angles",
    "objective_value",
    "offdiag_vector",
    "optimize",
    "penalty_derivative",
    "penalty_sum",
    "penalty_value",
    "poll_candidates",
    "random_angles",
    "random_corr",
    "recover_sigma",
    "rowcol_of",
    "run_benchmark",
    "sample_moments",
    "sample_mvn",
    "simulate",
    "stationarity_check",
    "support_of",
    "validate_corr",
    "wrap_angles",
]
