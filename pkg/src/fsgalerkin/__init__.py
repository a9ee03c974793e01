"""Spectral Faedo-Galerkin simulation of Caputo-fractional stochastic
integro-differential equations with non-instantaneous impulses."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigurationError,
    ConvergenceError,
    DomainError,
    FSGalerkinError,
    InsufficientDataError,
    ParameterError,
    RangeError,
    ShapeError,
)
from .fractional_calculus import MLParams, SampledFunction, caputo_derivative, mittag_leffler, ml, rl_integral  # noqa: E402
from .spectral import Spectrum, apply_frac_power, h_beta_norm_sq, project, projection_gap_norm  # noqa: E402
from .families import FamilyParams, cosine_apply, estimate_bounds, rl_apply, sine_apply  # noqa: E402
from .noise import CovarianceSpec, WienerPath, derive_seed, ito_integral, lemma21_check, sample_wiener  # noqa: E402
from .problem import (  # noqa: E402
    ConstantsLedger,
    ImpulseSchedule,
    NonlinearitySpec,
    ProblemSpec,
    build_heat_example,
    build_scalar_example,
    compute_constants,
    feasibility_check,
)
from .solver import PathSolution, PicardConfig, TimeGrid, apply_phi, fg_project, residual_check, solve  # noqa: E402
from .harness import (  # noqa: E402
    ConvergenceReport,
    coefficient_convergence,
    convergence_study,
    decay_slope,
    pairwise_error,
    theoretical_bound,
)

__all__ = [
    "ConfigurationError",
    "ConstantsLedger",
    "ConvergenceError",
    "ConvergenceReport",
    "CovarianceSpec",
    "DomainError",
    "FSGalerkinError",
    "FamilyParams",
    "ImpulseSchedule",
    "InsufficientDataError",
    "MLParams",
    "NonlinearitySpec",
    "ParameterError",
    "PathSolution",
    "PicardConfig",
    "ProblemSpec",
    "RangeError",
    "SampledFunction",
    "ShapeError",
    "Spectrum",
    "TimeGrid",
    "WienerPath",
    "apply_frac_power",
    "apply_phi",
    "build_heat_example",
    "build_scalar_example",
    "caputo_derivative",
    "coefficient_convergence",
    "compute_constants",
    "convergence_study",
    "cosine_apply",
    "decay_slope",
    "derive_seed",
    "estimate_bounds",
    "feasibility_check",
    "fg_project",
    "h_beta_norm_sq",
    "ito_integral",
    "lemma21_check",
    "mittag_leffler",
    "ml",
    "pairwise_error",
    "project",
    "projection_gap_norm",
    "residual_check",
    "rl_apply",
    "rl_integral",
    "sample_wiener",
    "sine_apply",
    "solve",
    "theoretical_bound",
]
