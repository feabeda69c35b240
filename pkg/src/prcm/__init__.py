"""PRCM - exact and Monte Carlo tools for the plaquette random-cluster model."""

from .types import (
    Convention,
    BoundaryKind,
    Cell,
    Box,
    Configuration,
    BoundaryCondition,
)
from .errors import (
    PRCMException,
    InvalidCellError,
    InvalidContextError,
    InvalidComplexError,
    NotACycleError,
    EnumerationLimitError,
    StabilizationError,
    VerificationError,
    ConfigError,
)
from .context import Context, dual_context, dual_parameter
from .homology import (
    homology_size_mod_q,
    cohomology_size_mod_q,
    integral_homology,
    induced_image_size,
    wired_size,
    boundary_class_order,
    euler_poincare_constant,
)
from .boundary import ClusterTerm, stabilize_truncation
from .measure import (
    MeasureTable,
    weight,
    enumerate_measure,
    plaquette_marginal,
    pressure,
    null_homology_probability,
)
from .sampler import run_chain, run_chains, batch_means
from .coupling import run_coupled_chain, wilson_estimate, certify_wilson_estimator
from .report import Report, VerificationReport

__version__ = "1.0.0"
__all__ = [
    # Types
    "Convention",
    "BoundaryKind",
    "Cell",
    "Box",
    "Configuration",
    "BoundaryCondition",
    "Context",
    "dual_context",
    "dual_parameter",
    # Errors
    "PRCMException",
    "InvalidCellError",
    "InvalidContextError",
    "InvalidComplexError",
    "NotACycleError",
    "EnumerationLimitError",
    "StabilizationError",
    "VerificationError",
    "ConfigError",
    # Homology
    "homology_size_mod_q",
    "cohomology_size_mod_q",
    "integral_homology",
    "induced_image_size",
    "wired_size",
    "boundary_class_order",
    "euler_poincare_constant",
    # Measure
    "ClusterTerm",
    "stabilize_truncation",
    "MeasureTable",
    "weight",
    "enumerate_measure",
    "plaquette_marginal",
    "pressure",
    "null_homology_probability",
    # Sampling
    "run_chain",
    "run_chains",
    "batch_means",
    "run_coupled_chain",
    "wilson_estimate",
    "certify_wilson_estimator",
    # Reports
    "Report",
    "VerificationReport",
]
