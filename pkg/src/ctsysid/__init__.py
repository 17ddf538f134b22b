"""Identification of continuous-time stochastic linear systems from a single
trajectory, with evaluation of the finite-time error bounds.

The package simulates dX = (A X + B U) dt + C dW under a randomized
white-noise input, estimates the open-loop matrix A by least squares, and
evaluates every closed-form quantity the theory attaches to that
estimate: the self-normalized martingale radius, iterated-logarithm state
envelopes, covariance eigenvalue bounds, and the regime-dependent error
rates. A compiled kernel drives the hot recursion when available.
"""

__version__ = "0.1.0"

from ._kernel import backend_name as kernel_backend
from ._rng import draw_increments, increments, initial_state
from .bounds import (
    BoundReport,
    build_bound_report,
    covmax_bound,
    covmin_bound,
    covmin_floor_constant,
    lil_envelope,
    normalized_martingale_norm,
    quadratic_variation_clock,
    self_normalized_radius,
    state_envelope,
    theorem1_rate,
)
from .estimator import (
    CovarianceAccumulator,
    Estimate,
    OracleUnavailableError,
    SeriesPoint,
    accumulate,
    accumulate_checkpoints,
    error_identity_residual,
    estimate,
    scaled_error_series,
)
from .experiments import (
    ExperimentConfig,
    load_config,
    parse_config,
    reactor_system,
    run_experiment,
    scalar_ou_system,
    summarize,
)
from .linalg import (
    AssumptionViolation,
    EigensolverError,
    JordanStructure,
    Regime,
    SpectrumSummary,
    StructuralConstants,
    classify_stability,
    eigen_real_parts,
    largest_jordan_block,
    matrix_exponential,
    spectrum_summary,
    structural_constants,
)
from .simulate import (
    EULER_MARUYAMA,
    EXACT_LTI,
    SimConfig,
    SystemSpec,
    Trajectory,
    simulate_trajectory,
)

__all__ = [
    "AssumptionViolation",
    "BoundReport",
    "CovarianceAccumulator",
    "EigensolverError",
    "Estimate",
    "EULER_MARUYAMA",
    "EXACT_LTI",
    "ExperimentConfig",
    "JordanStructure",
    "OracleUnavailableError",
    "Regime",
    "SeriesPoint",
    "SimConfig",
    "SpectrumSummary",
    "StructuralConstants",
    "SystemSpec",
    "Trajectory",
    "accumulate",
    "accumulate_checkpoints",
    "build_bound_report",
    "classify_stability",
    "covmax_bound",
    "covmin_bound",
    "covmin_floor_constant",
    "draw_increments",
    "eigen_real_parts",
    "error_identity_residual",
    "estimate",
    "increments",
    "initial_state",
    "kernel_backend",
    "largest_jordan_block",
    "lil_envelope",
    "load_config",
    "matrix_exponential",
    "normalized_martingale_norm",
    "parse_config",
    "quadratic_variation_clock",
    "reactor_system",
    "run_experiment",
    "scalar_ou_system",
    "scaled_error_series",
    "self_normalized_radius",
    "simulate_trajectory",
    "spectrum_summary",
    "state_envelope",
    "structural_constants",
    "summarize",
    "theorem1_rate",
]
