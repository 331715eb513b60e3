"""Discrete integral conventions: left-point sums against dx and dt.

Both sums share the left-point convention, so stochastic integrals are
non-anticipating and the triangle-inequality envelopes computed against dt
hold exactly at every node, not just in the continuum limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import PathRecord, TimeGrid


@dataclass(frozen=True, eq=False)
class CumulativeSeries:
    """Running sum aligned to the grid nodes: values[0] = 0, len = N+1."""

    grid: TimeGrid
    values: np.ndarray


def _as_values(series) -> np.ndarray:
    if isinstance(series, CumulativeSeries):
        return series.values
    return np.asarray(series)


def _checked_integrand(integrand, n: int) -> np.ndarray:
    f = np.asarray(integrand, dtype=np.float64)
    if f.ndim != 1 or len(f) != n:
        raise ValueError(f"integrand must have {n} entries, got shape {f.shape}")
    return f


def _prefix(terms: np.ndarray, grid: TimeGrid) -> CumulativeSeries:
    values = np.empty(len(terms) + 1)
    values[0] = 0.0
    np.cumsum(terms, out=values[1:])
    values.setflags(write=False)
    return CumulativeSeries(grid=grid, values=values)


def ito_cumsum(integrand, path: PathRecord) -> CumulativeSeries:
    """Cumulative left-point sum of integrand against the path increments.

    values[k+1] = values[k] + integrand[k] * (x[k+1] - x[k])
    """
    f = _checked_integrand(integrand, path.grid.n_steps)
    return _prefix(f * np.diff(path.x), path.grid)


def riemann_cumsum(integrand, grid: TimeGrid) -> CumulativeSeries:
    """Cumulative left-point sum of integrand against dt.

    values[k+1] = values[k] + integrand[k] * dt
    """
    f = _checked_integrand(integrand, grid.n_steps)
    return _prefix(f * grid.dt, grid)
