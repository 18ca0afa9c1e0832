"""Moment-based learning of negative (signed) mixtures.

Spherical Gaussian mixtures with negative weights are recovered from their
second and third moments through a complex whitening and a tensor power
method on pseudo-orthonormal decompositions. Rational string distributions
are written as signed mixtures of two probabilistic automata.
"""

from .estimator import NegativeGaussianMixture, TensorPowerDecomposition
from .exceptions import (
    BoundHypothesisError,
    ConvergenceError,
    DegenerateNormalizerError,
    DivergenceError,
    FitError,
    GapAssumptionError,
    LowAcceptanceError,
    NegMixError,
    NormalizationError,
    RankDeficiencyError,
    SingularWhiteningError,
)
from .gaussian import (
    SphericalMixture,
    alpha_max_spherical,
    analytic_moment_tensors,
    fit,
    gauss_envelope,
    pdf,
    rejection_sample,
    sample_mixture,
)
from .power import convergence_bound, decompose, power_iterate, recover_parameters, sqrt_perturb_bound
from .wfa import LinearRep, PAMixture, ProbAutomaton, eval_word, series_sum, split_difference, to_pa_mixture
from .whitening import build_whitening, truncated_sym_eig, whitening_from_moments

__version__ = "0.1.0"

__all__ = [
    "NegativeGaussianMixture",
    "TensorPowerDecomposition",
    "NegMixError",
    "RankDeficiencyError",
    "SingularWhiteningError",
    "DegenerateNormalizerError",
    "ConvergenceError",
    "GapAssumptionError",
    "BoundHypothesisError",
    "DivergenceError",
    "NormalizationError",
    "LowAcceptanceError",
    "FitError",
    "SphericalMixture",
    "alpha_max_spherical",
    "analytic_moment_tensors",
    "fit",
    "gauss_envelope",
    "pdf",
    "rejection_sample",
    "sample_mixture",
    "convergence_bound",
    "decompose",
    "power_iterate",
    "recover_parameters",
    "sqrt_perturb_bound",
    "LinearRep",
    "PAMixture",
    "ProbAutomaton",
    "eval_word",
    "series_sum",
    "split_difference",
    "to_pa_mixture",
    "build_whitening",
    "truncated_sym_eig",
    "whitening_from_moments",
]
