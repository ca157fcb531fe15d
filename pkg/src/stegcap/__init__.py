"""Embedding-rate limits for Gaussian-modeled covers.

Closed-form capacity of covariance-scaling embeddings under a
relative-entropy detectability budget, the matching optimal codebook
parameters, Gibbs/Gaussian model bridging on quantized alphabets, and
Monte Carlo experiments that validate the theory end to end.
"""

from ._version import __version__
from .capacity import (
    CapacityQuery,
    CapacityResult,
    DetectionBounds,
    PeBound,
    detection_bounds,
    embedding_factor_bounds_from_pe,
    max_embedding_rate,
    optimal_codebook_params,
    srl_bound,
)
from .errors import (
    BudgetExceeded,
    ConvergenceError,
    DegenerateMessage,
    DimensionMismatch,
    DomainError,
    EmptySample,
    InvalidState,
    NotPositiveDefinite,
    SchemaError,
    StateSpaceTooLarge,
    StegcapError,
)
from .gaussmodel import (
    Ar1Toeplitz,
    CovarianceSpec,
    Dense,
    EmpiricalKl,
    GaussianModel,
    QuantizationGrid,
    ScaledIdentity,
    empirical_kl_quantized,
    entropy_quantized,
    kl_gaussian,
    kl_gaussian_reverse,
    sample,
)
from .gibbs import (
    FieldState,
    MRFSpec,
    PotentialSpec,
    energy,
    equivalence_report,
    gibbs_pmf,
    gibbs_table,
    model_from_potentials,
    partition_function,
    quantized_gaussian_pmf_on_alphabet,
    spec_from_dict,
    spec_to_dict,
)
from .montecarlo import (
    DecodingExperiment,
    DecodingReport,
    DetectionExperiment,
    DetectionReport,
    exact_lrt_error_diagonal,
    run_decoding,
    run_detection,
)
from .published import PublishedPoint, read_published_csv, write_published_csv
from .specfun import (
    DEFAULT_SOLVER,
    SolverConfig,
    embedding_factor_from_gamma,
    lambert_w_m1,
    verify_residual,
)
from .tables import (
    flag_published_points,
    log_n_grid,
    payload_vs_pe_rows,
    rate_vs_n_rows,
)

__all__ = [
    "__version__",
    # errors
    "StegcapError",
    "DomainError",
    "ConvergenceError",
    "DimensionMismatch",
    "NotPositiveDefinite",
    "EmptySample",
    "InvalidState",
    "StateSpaceTooLarge",
    "DegenerateMessage",
    "BudgetExceeded",
    "SchemaError",
    # special functions
    "SolverConfig",
    "DEFAULT_SOLVER",
    "lambert_w_m1",
    "embedding_factor_from_gamma",
    "verify_residual",
    # Gaussian models
    "CovarianceSpec",
    "ScaledIdentity",
    "Ar1Toeplitz",
    "Dense",
    "QuantizationGrid",
    "GaussianModel",
    "kl_gaussian",
    "kl_gaussian_reverse",
    "entropy_quantized",
    "sample",
    "EmpiricalKl",
    "empirical_kl_quantized",
    # Gibbs bridging
    "MRFSpec",
    "PotentialSpec",
    "FieldState",
    "energy",
    "partition_function",
    "gibbs_pmf",
    "gibbs_table",
    "quantized_gaussian_pmf_on_alphabet",
    "model_from_potentials",
    "equivalence_report",
    "spec_from_dict",
    "spec_to_dict",
    # capacity
    "CapacityQuery",
    "CapacityResult",
    "DetectionBounds",
    "PeBound",
    "max_embedding_rate",
    "optimal_codebook_params",
    "srl_bound",
    "embedding_factor_bounds_from_pe",
    "detection_bounds",
    # Monte Carlo
    "DetectionExperiment",
    "DetectionReport",
    "DecodingExperiment",
    "DecodingReport",
    "run_detection",
    "run_decoding",
    "exact_lrt_error_diagonal",
    # tables and published points
    "log_n_grid",
    "rate_vs_n_rows",
    "payload_vs_pe_rows",
    "flag_published_points",
    "PublishedPoint",
    "read_published_csv",
    "write_published_csv",
]
