"""Knockoff filter for FDR-controlled variable selection in Gaussian linear models.

The pipeline is: build a knockoff copy of the design (:mod:`~knockoffs.construct`),
score each feature against its knockoff (:mod:`~knockoffs.stats`), and threshold
the scores at a target FDR level (:mod:`~knockoffs.selection`).  Group-level
filters live in :mod:`~knockoffs.groups` and the simulation harness in
:mod:`~knockoffs.simlab`.
"""

from .construct import (
    KnockoffModel,
    KnockoffReport,
    LocalizedKnockoffModel,
    SMethod,
    SVector,
    build_knockoff,
    build_localized_knockoff,
    s_equivariant,
    s_modified_sdp,
    s_sdp,
    swap_pairs,
    validate_knockoff,
)
from .exceptions import KnockoffError
from .groups import (
    GroupSelectionResult,
    GroupStructure,
    group_evaluate,
    group_knockoff_filter,
    pca_prototype_filter,
    pca_reformulate,
    split_prototype_filter,
)
from .selection import (
    EvalReport,
    McSummary,
    Offset,
    SelectionResult,
    evaluate,
    knockoff_threshold,
    monte_carlo_fdr,
)
from .simlab import (
    DesignKind,
    DesignSpec,
    SignalBlock,
    SignalKind,
    SignalSpec,
    gen_design,
    gen_signal,
    run_experiment,
)
from .stats import (
    Combiner,
    HalfPenalizedSolution,
    NoiseEstimate,
    PathConfig,
    StatKind,
    StatVector,
    compute_stat,
    estimate_sigma,
    half_lasso,
    half_lasso_sigma_scaled,
    neg_half_lasso,
    stat_forward_selection,
    stat_lasso_path,
    stat_least_squares,
    stat_marginal_corr,
    stat_omp,
    weighted_half_lasso,
)

__version__ = "0.1.0"

__all__ = [
    "KnockoffError",
    "SMethod",
    "SVector",
    "KnockoffModel",
    "KnockoffReport",
    "LocalizedKnockoffModel",
    "s_equivariant",
    "s_sdp",
    "s_modified_sdp",
    "build_knockoff",
    "build_localized_knockoff",
    "validate_knockoff",
    "swap_pairs",
    "StatKind",
    "Combiner",
    "StatVector",
    "PathConfig",
    "NoiseEstimate",
    "HalfPenalizedSolution",
    "stat_marginal_corr",
    "stat_least_squares",
    "half_lasso",
    "weighted_half_lasso",
    "neg_half_lasso",
    "half_lasso_sigma_scaled",
    "stat_lasso_path",
    "stat_forward_selection",
    "stat_omp",
    "estimate_sigma",
    "compute_stat",
    "Offset",
    "SelectionResult",
    "EvalReport",
    "McSummary",
    "knockoff_threshold",
    "evaluate",
    "monte_carlo_fdr",
    "GroupStructure",
    "GroupSelectionResult",
    "pca_reformulate",
    "pca_prototype_filter",
    "group_knockoff_filter",
    "split_prototype_filter",
    "group_evaluate",
    "DesignKind",
    "DesignSpec",
    "SignalKind",
    "SignalBlock",
    "SignalSpec",
    "gen_design",
    "gen_signal",
    "run_experiment",
]
