"""Segmented linear regression: exact dynamic programming and fast greedy
merging estimators, with synthetic scenarios and a benchmark harness."""

from .bench import BenchRecord, fit_runtime_slope, run_sweep, write_plot_data
from .estimators import DpTable, compute_dp_table, fit_exact_dp, fit_restricted_dp
from .linalg import (
    GramState,
    IntervalErrorTable,
    build_error_table,
    default_ridge,
    gram_absorb,
    gram_error,
    gram_seed,
    least_squares,
)
from .merging import (
    CandidatePair,
    MergeConfig,
    bucket_greedy_merge,
    estimate_noise_var,
    greedy_merge,
    pair_candidates,
    postprocess,
    select_top_errors,
)
from .model import (
    CapacityError,
    DataSet,
    FitReport,
    NonFiniteDataError,
    ParameterError,
    Partition,
    PiecewiseLinearModel,
    SingularUpdateError,
    StructuralError,
    mse,
    predict,
    sse_against_responses,
)
from .synth import ScenarioSpec, SyntheticInstance, generate, vandermonde_embed

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "CandidatePair",
    "CapacityError",
    "DataSet",
    "DpTable",
    "FitReport",
    "GramState",
    "IntervalErrorTable",
    "MergeConfig",
    "NonFiniteDataError",
    "ParameterError",
    "Partition",
    "PiecewiseLinearModel",
    "ScenarioSpec",
    "SingularUpdateError",
    "StructuralError",
    "SyntheticInstance",
    "bucket_greedy_merge",
    "build_error_table",
    "compute_dp_table",
    "default_ridge",
    "estimate_noise_var",
    "fit_exact_dp",
    "fit_restricted_dp",
    "fit_runtime_slope",
    "generate",
    "gram_absorb",
    "gram_error",
    "gram_seed",
    "greedy_merge",
    "least_squares",
    "mse",
    "pair_candidates",
    "postprocess",
    "predict",
    "run_sweep",
    "select_top_errors",
    "sse_against_responses",
    "vandermonde_embed",
    "write_plot_data",
]
