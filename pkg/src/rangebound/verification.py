"""Machine-checkable reports: envelope margins, identity residuals,
reference-vs-fast equivalence, and convergence orders under grid refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import (
    CoefficientSpec,
    PathRecord,
    build_grid,
    coarsen_increments,
    simulate_path,
)
from .errors import OracleCostError
from .quadrature import _as_values
from .transforms import (
    TransformSeries,
    bounded_identity_sides,
    bounded_transform_direct,
    bounded_transform_recursive,
    scaled_rotation_running_sides,
    unit_rotation_running_sides,
    weighted_identity_sides,
    weighted_transform_direct,
    weighted_transform_recursive,
)

DEFAULT_ORACLE_CEILING = 4000

IDENTITY_NAMES = ("bounded", "weighted", "unit_rotation", "scaled_rotation")

TRANSFORM_PAIRS = {
    "bounded": (bounded_transform_direct, bounded_transform_recursive),
    "weighted": (weighted_transform_direct, weighted_transform_recursive),
}


@dataclass(frozen=True)
class BoundReport:
    """Worst node-wise excess of the transform modulus over its envelope."""

    max_violation: float
    violation_index: int
    tolerance_used: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceReport:
    """Residual norms across a refinement ladder and the implied orders."""

    grid_sizes: tuple[int, ...]
    residual_norms: tuple[float, ...]
    estimated_orders: tuple[float, ...]
    median_order: float


def check_envelope(ts: TransformSeries, envelope, tolerance: float) -> BoundReport:
    """Compare sqrt(X^2 + Y^2) against the envelope node by node."""
    env = _as_values(envelope)
    if hasattr(envelope, "grid") and not ts.grid.same_mesh(envelope.grid):
        raise ValueError("transform and envelope live on different grids")
    if len(env) != len(ts.X):
        raise ValueError(f"envelope must have {len(ts.X)} entries, got {len(env)}")
    margin = ts.modulus() - env
    idx = int(np.argmax(margin))
    worst = float(margin[idx])
    return BoundReport(
        max_violation=worst,
        violation_index=idx,
        tolerance_used=float(tolerance),
        passed=worst <= tolerance,
    )


def residual_norm(lhs, rhs) -> float:
    """Max-norm distance between two grid-aligned series."""
    a = _as_values(lhs)
    b = _as_values(rhs)
    if len(a) != len(b):
        raise ValueError(f"series lengths differ: {len(a)} vs {len(b)}")
    return float(np.max(np.abs(a - b)))


def identity_residual(path: PathRecord, identity: str) -> float:
    """Max-norm residual of the selected identity on one path.

    Every identity is checked over the whole grid, rotations included: the
    claims hold for every horizon, so the residual is the max-norm of the
    running lhs/rhs series, not an endpoint difference.
    """
    if identity == "bounded":
        lhs, rhs = bounded_identity_sides(path, bounded_transform_recursive(path))
        return residual_norm(lhs, rhs)
    if identity == "weighted":
        lhs, rhs = weighted_identity_sides(path, weighted_transform_recursive(path))
        return residual_norm(lhs, rhs)
    if identity == "unit_rotation":
        return residual_norm(*unit_rotation_running_sides(path))
    if identity == "scaled_rotation":
        return residual_norm(*scaled_rotation_running_sides(path))
    raise ValueError(f"unknown identity {identity!r}, expected one of {IDENTITY_NAMES}")


def orders_from_residuals(residual_norms) -> list[float]:
    """log2 decay rate per refinement pair, coarse to fine."""
    norms = list(residual_norms)
    orders = []
    for coarse, fine in zip(norms, norms[1:]):
        with np.errstate(divide="ignore", invalid="ignore"):
            orders.append(float(np.log2(np.float64(coarse) / np.float64(fine))))
    return orders


def estimate_order(
    fine_increments,
    *,
    t_max: float,
    a_spec: CoefficientSpec,
    sigma_spec: CoefficientSpec,
    u_spec: CoefficientSpec,
    x0: float = 0.0,
    refinement_levels: int = 4,
    identity: str = "bounded",
) -> ConvergenceReport:
    """Re-simulate the same Wiener path on a ladder of coarsened grids and
    track how the selected identity's residual shrinks.

    The finest increment count must be divisible by 2**(refinement_levels-1);
    every coarser grid reuses the fine noise through pairwise coarsening, so
    residual decay reflects discretization error only.
    """
    fine = np.asarray(fine_increments, dtype=np.float64)
    if refinement_levels < 3:
        raise ValueError(f"refinement_levels must be >= 3, got {refinement_levels}")
    span = 2 ** (refinement_levels - 1)
    if len(fine) % span != 0:
        raise ValueError(
            f"finest increment count {len(fine)} is not divisible by {span}"
        )
    sizes = []
    norms = []
    for level in reversed(range(refinement_levels)):
        factor = 2**level
        n = len(fine) // factor
        grid = build_grid(t_max, n)
        path = simulate_path(a_spec, sigma_spec, u_spec, grid, coarsen_increments(fine, factor), x0)
        sizes.append(n)
        norms.append(identity_residual(path, identity))
    orders = orders_from_residuals(norms)
    return ConvergenceReport(
        grid_sizes=tuple(sizes),
        residual_norms=tuple(norms),
        estimated_orders=tuple(orders),
        median_order=float(np.median(orders)),
    )


def compare_oracle(
    path: PathRecord, which: str = "bounded", ceiling: int = DEFAULT_ORACLE_CEILING
) -> float:
    """Max |direct - recursive| over both components and all nodes.

    Refuses paths longer than the ceiling: the direct reference is O(N^2).
    """
    if which not in TRANSFORM_PAIRS:
        raise ValueError(f"unknown transform {which!r}, expected one of {tuple(TRANSFORM_PAIRS)}")
    n = path.grid.n_steps
    if n > ceiling:
        raise OracleCostError(
            f"direct reference refused: {n} steps exceeds the ceiling of {ceiling}"
        )
    direct_fn, recursive_fn = TRANSFORM_PAIRS[which]
    direct = direct_fn(path)
    fast = recursive_fn(path)
    return max(
        float(np.max(np.abs(direct.X - fast.X))),
        float(np.max(np.abs(direct.Y - fast.Y))),
    )
