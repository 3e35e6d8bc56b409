"""Prior-shift adaptation of direct-posterior classifiers."""

from .core import (
    AdaptationMatrix,
    ConvergenceError,
    DimensionError,
    LikelihoodVector,
    ProbabilityVector,
    SimplexError,
    SolveReport,
    SolverConfig,
    adapt,
    adapt_batch,
    build_a_matrix,
    build_m_matrix,
    closed_form_likelihoods,
    map_class,
    recover_likelihoods,
    update_posteriors,
)

__all__ = [
    "AdaptationMatrix",
    "ConvergenceError",
    "DimensionError",
    "LikelihoodVector",
    "ProbabilityVector",
    "SimplexError",
    "SolveReport",
    "SolverConfig",
    "adapt",
    "adapt_batch",
    "build_a_matrix",
    "build_m_matrix",
    "closed_form_likelihoods",
    "map_class",
    "recover_likelihoods",
    "update_posteriors",
]
