"""Chebyshev step schedules for gradient descent and periodic SOR.

The package splits into spectral utilities, the Chebyshev schedule/rate
core, a quadratic GD engine with accelerated baselines, a fixed-point
engine with Chebyshev-periodical SOR, concrete solver applications, and a
seeded experiment harness with a CLI front end.
"""

from ._version import __version__
from .apps import (
    BlurModel,
    LassoProblem,
    LinearSystem,
    blur_matrix,
    conv2d_same,
    default_blur_kernel,
    ista_operator,
    jacobi_operator,
    lasso_objective,
    make_blur_forward,
    make_lasso_problem,
    make_sparse_blob_image,
    richardson_operator,
    run_fista,
    sigmoid,
    soft_shrink,
    soft_shrink_smooth,
)
from .chebyshev import (
    RateReport,
    StepSchedule,
    beta_t,
    cheb_eval,
    cheb_nodes,
    chebyshev_psor_factors,
    chebyshev_steps,
    constant_schedule,
    load_schedule,
    permutation_search,
    rate_report,
    rho_upp,
    save_schedule,
    theorem2_margin,
)
from .errors import (
    ChebAccelError,
    DegenerateSpectrumError,
    InvalidOverrideError,
    NegativeDerivativeError,
    NoConvergenceError,
    NonFiniteError,
    NotSymmetricError,
    SingularMatrixError,
    SizeLimitError,
    StepTooLargeError,
    UnknownExperimentError,
    ZeroDiagonalError,
)
from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    RunManifest,
    derive_seed,
    experiment_names,
    run_experiment,
)
from .graddesc import (
    QuadraticProblem,
    chebyshev_semi_coefficients,
    make_gaussian_gram_problem,
    mse_radius_identity,
    run_chebyshev_semi,
    run_gd,
    run_momentum,
    spectral_radius_qt,
)
from .psor import (
    AffineCompositeOperator,
    FixedPointOperator,
    PsorConfig,
    affine_jacobian_spectrum_check,
    jacobian_fd,
    local_rate_report,
    psor_bounds_from_operator,
    run_fixed_point,
    run_psor,
)
from .spectral import (
    Eigendecomposition,
    SpectralBounds,
    condition_number,
    estimate_bounds,
    is_symmetric,
    load_matrix,
    power_iteration_max,
    save_matrix,
    sym_eigendecompose,
)
from .trace import IterationTrace, load_trace, save_trace

__all__ = [
    "__version__",
    # spectral
    "SpectralBounds",
    "Eigendecomposition",
    "sym_eigendecompose",
    "power_iteration_max",
    "estimate_bounds",
    "condition_number",
    "is_symmetric",
    "save_matrix",
    "load_matrix",
    # chebyshev
    "StepSchedule",
    "RateReport",
    "cheb_eval",
    "cheb_nodes",
    "chebyshev_steps",
    "chebyshev_psor_factors",
    "constant_schedule",
    "beta_t",
    "rho_upp",
    "rate_report",
    "theorem2_margin",
    "permutation_search",
    "save_schedule",
    "load_schedule",
    # traces
    "IterationTrace",
    "save_trace",
    "load_trace",
    # graddesc
    "QuadraticProblem",
    "make_gaussian_gram_problem",
    "run_gd",
    "run_momentum",
    "run_chebyshev_semi",
    "chebyshev_semi_coefficients",
    "spectral_radius_qt",
    "mse_radius_identity",
    # psor
    "FixedPointOperator",
    "AffineCompositeOperator",
    "PsorConfig",
    "run_fixed_point",
    "run_psor",
    "local_rate_report",
    "jacobian_fd",
    "affine_jacobian_spectrum_check",
    "psor_bounds_from_operator",
    # apps
    "LinearSystem",
    "jacobi_operator",
    "LassoProblem",
    "make_lasso_problem",
    "soft_shrink",
    "soft_shrink_smooth",
    "sigmoid",
    "lasso_objective",
    "ista_operator",
    "run_fista",
    "richardson_operator",
    "BlurModel",
    "default_blur_kernel",
    "conv2d_same",
    "blur_matrix",
    "make_blur_forward",
    "make_sparse_blob_image",
    # experiments
    "EXPERIMENTS",
    "ExperimentConfig",
    "RunManifest",
    "experiment_names",
    "derive_seed",
    "run_experiment",
    # errors
    "ChebAccelError",
    "NotSymmetricError",
    "NoConvergenceError",
    "DegenerateSpectrumError",
    "SizeLimitError",
    "NonFiniteError",
    "ZeroDiagonalError",
    "StepTooLargeError",
    "SingularMatrixError",
    "NegativeDerivativeError",
    "UnknownExperimentError",
    "InvalidOverrideError",
]
