"""Stochastic integrals with a preselected containing range.

Simulates dx = a dt + sigma dw paths, applies phasor-convolution transforms
whose modulus stays inside a chosen deterministic envelope for every drift,
and verifies the envelopes, identities, and convergence orders by simulation.
"""

__version__ = "0.1.0"

from .config import ALL_OUTPUTS, ExperimentConfig, parse_coefficient, parse_config
from .engine import (
    CoefficientSpec,
    PathRecord,
    TimeGrid,
    build_grid,
    coarsen_increments,
    sample_wiener,
    simulate_path,
    simulate_seeded,
)
from .errors import ConfigurationError, OracleCostError
from .experiment import (
    ExperimentManifest,
    emit_figures,
    prepare_path,
    run_experiment,
    verify_suite,
)
from .quadrature import CumulativeSeries, ito_cumsum, riemann_cumsum
from .transforms import (
    PhasorAccumulator,
    RotationIdentity,
    TransformSeries,
    bounded_identity_sides,
    bounded_transform_direct,
    bounded_transform_recursive,
    scaled_rotation_identity,
    scaled_rotation_running_sides,
    unit_rotation_identity,
    unit_rotation_running_sides,
    variance_discounted_u,
    weighted_identity_sides,
    weighted_transform_direct,
    weighted_transform_recursive,
)
from .verification import (
    DEFAULT_ORACLE_CEILING,
    BoundReport,
    ConvergenceReport,
    check_envelope,
    compare_oracle,
    estimate_order,
    identity_residual,
    orders_from_residuals,
    residual_norm,
)

__all__ = [
    "ALL_OUTPUTS",
    "BoundReport",
    "CoefficientSpec",
    "ConfigurationError",
    "ConvergenceReport",
    "CumulativeSeries",
    "DEFAULT_ORACLE_CEILING",
    "ExperimentConfig",
    "ExperimentManifest",
    "OracleCostError",
    "PathRecord",
    "PhasorAccumulator",
    "RotationIdentity",
    "TimeGrid",
    "TransformSeries",
    "bounded_identity_sides",
    "bounded_transform_direct",
    "bounded_transform_recursive",
    "build_grid",
    "check_envelope",
    "coarsen_increments",
    "compare_oracle",
    "emit_figures",
    "estimate_order",
    "identity_residual",
    "ito_cumsum",
    "orders_from_residuals",
    "parse_coefficient",
    "parse_config",
    "prepare_path",
    "residual_norm",
    "riemann_cumsum",
    "run_experiment",
    "sample_wiener",
    "scaled_rotation_identity",
    "scaled_rotation_running_sides",
    "simulate_path",
    "simulate_seeded",
    "unit_rotation_identity",
    "unit_rotation_running_sides",
    "variance_discounted_u",
    "verify_suite",
    "weighted_identity_sides",
    "weighted_transform_direct",
    "weighted_transform_recursive",
    "__version__",
]
