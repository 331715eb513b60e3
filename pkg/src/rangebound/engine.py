"""Euler-Maruyama simulation of dx = a dt + sigma dw on uniform grids.

All randomness goes through a counter-based generator (Philox) keyed by an
integer seed, so a (grid, seed) pair pins the Wiener increments bit-exactly
across runs. Coefficients are sampled at the left node of every step, which
keeps every discrete sum built on top of these paths non-anticipating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

COEFFICIENT_KINDS = ("const", "sin", "state", "samples")


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform mesh on [0, t_max] with n_steps intervals of width dt.

    nodes[k] = k * dt for k < n_steps; the last node is set to t_max exactly
    rather than accumulated.
    """

    t_max: float
    n_steps: int
    dt: float
    nodes: np.ndarray

    def same_mesh(self, other: "TimeGrid") -> bool:
        return self.n_steps == other.n_steps and self.t_max == other.t_max


def build_grid(t_max: float, n_steps: int) -> TimeGrid:
    """Build the uniform grid with dt = t_max / n_steps.

    Raises ValueError if t_max is not positive or n_steps is not a positive
    integer.
    """
    t_max = float(t_max)
    if not np.isfinite(t_max) or t_max <= 0.0:
        raise ValueError(f"t_max must be positive and finite, got {t_max}")
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise ValueError(f"n_steps must be an integer >= 1, got {n_steps!r}")
    n_steps = int(n_steps)
    dt = t_max / n_steps
    nodes = dt * np.arange(n_steps + 1, dtype=np.float64)
    nodes[-1] = t_max
    nodes.setflags(write=False)
    return TimeGrid(t_max=t_max, n_steps=n_steps, dt=dt, nodes=nodes)


@dataclass(frozen=True, eq=False)
class CoefficientSpec:
    """One of the bounded coefficient presets for a, sigma, or u.

    kind:
      const    params (c,)            -> c
      sin      params (c0, c1, omega) -> c0 + c1 * sin(omega * t)
      state    params (c,)            -> c / (1 + x**2)
      samples  explicit per-step values, one per left node
    """

    kind: str
    params: tuple[float, ...] = ()
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in COEFFICIENT_KINDS:
            raise ConfigurationError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "samples":
            if self.samples is None:
                raise ConfigurationError("samples coefficient requires a value series")
            if not np.all(np.isfinite(self.samples)):
                raise ConfigurationError("samples coefficient contains non-finite values")
        elif not all(np.isfinite(p) for p in self.params):
            raise ConfigurationError(f"coefficient parameters must be finite, got {self.params}")

    @classmethod
    def constant(cls, c: float) -> "CoefficientSpec":
        return cls("const", (float(c),))

    @classmethod
    def sinusoid(cls, c0: float, c1: float, omega: float) -> "CoefficientSpec":
        return cls("sin", (float(c0), float(c1), float(omega)))

    @classmethod
    def state_bounded(cls, c: float) -> "CoefficientSpec":
        return cls("state", (float(c),))

    @classmethod
    def from_samples(cls, values) -> "CoefficientSpec":
        arr = np.asarray(values, dtype=np.float64).copy()
        arr.setflags(write=False)
        return cls("samples", samples=arr)

    @property
    def time_only(self) -> bool:
        """True when the value at a node does not depend on the state x."""
        return self.kind != "state"

    def at(self, k: int, t: float, x: float) -> float:
        if self.kind == "const":
            return self.params[0]
        if self.kind == "sin":
            c0, c1, omega = self.params
            return c0 + c1 * np.sin(omega * t)
        if self.kind == "state":
            return self.params[0] / (1.0 + x * x)
        values = self.samples
        if k >= len(values):
            raise ConfigurationError(
                f"samples coefficient has {len(values)} entries, need index {k}"
            )
        return values[k]

    def sample_series(self, grid: TimeGrid, x_left: np.ndarray | None = None) -> np.ndarray:
        """Values at the left nodes t_0 .. t_{N-1}; state kind needs x at those nodes."""
        t = grid.nodes[:-1]
        if self.kind == "const":
            return np.full(grid.n_steps, self.params[0])
        if self.kind == "sin":
            c0, c1, omega = self.params
            return c0 + c1 * np.sin(omega * t)
        if self.kind == "state":
            if x_left is None:
                raise ValueError("state-dependent coefficient needs the path values")
            return self.params[0] / (1.0 + x_left * x_left)
        if len(self.samples) != grid.n_steps:
            raise ConfigurationError(
                f"samples coefficient has {len(self.samples)} entries, grid needs {grid.n_steps}"
            )
        return self.samples


@dataclass(frozen=True, eq=False)
class PathRecord:
    """One simulated path plus everything needed to reproduce or transform it.

    x has N+1 entries; dw, a, sigma, u have N entries sampled at left nodes.
    The stored arrays are self-consistent: x[k+1] == x[k] + (a[k]*dt + sigma[k]*dw[k])
    with exactly that association of operations.
    """

    grid: TimeGrid
    x: np.ndarray
    dw: np.ndarray
    a: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    seed: int | None = None

    def with_u(self, u: np.ndarray) -> "PathRecord":
        u = np.asarray(u, dtype=np.float64)
        if len(u) != self.grid.n_steps:
            raise ValueError(f"u must have {self.grid.n_steps} entries, got {len(u)}")
        return PathRecord(self.grid, self.x, self.dw, self.a, self.sigma, u, self.seed)


def sample_wiener(grid: TimeGrid, seed: int) -> np.ndarray:
    """N independent Gaussian increments with mean 0 and variance dt.

    The same (grid, seed) pair always yields the same bits.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return rng.standard_normal(grid.n_steps) * np.sqrt(grid.dt)


def simulate_path(
    a_spec: CoefficientSpec,
    sigma_spec: CoefficientSpec,
    u_spec: CoefficientSpec,
    grid: TimeGrid,
    increments: np.ndarray,
    x0: float = 0.0,
    seed: int | None = None,
) -> PathRecord:
    """Advance x[k+1] = x[k] + a(t_k, x_k)*dt + sigma(t_k, x_k)*dw[k] from x[0] = x0."""
    dw = np.asarray(increments, dtype=np.float64)
    n = grid.n_steps
    if len(dw) != n:
        raise ValueError(f"increments must have {n} entries, got {len(dw)}")
    dt = grid.dt
    x0 = float(x0)

    if a_spec.time_only and sigma_spec.time_only:
        a = np.ascontiguousarray(a_spec.sample_series(grid), dtype=np.float64)
        sigma = np.ascontiguousarray(sigma_spec.sample_series(grid), dtype=np.float64)
        # cumsum is sequential for float64, so the stored path satisfies the
        # step recurrence bit-exactly
        steps = np.empty(n + 1)
        steps[0] = x0
        steps[1:] = a * dt + sigma * dw
        x = np.cumsum(steps)
    else:
        x = np.empty(n + 1)
        x[0] = x0
        a = np.empty(n)
        sigma = np.empty(n)
        nodes = grid.nodes
        for k in range(n):
            ak = a_spec.at(k, nodes[k], x[k])
            sk = sigma_spec.at(k, nodes[k], x[k])
            a[k] = ak
            sigma[k] = sk
            x[k + 1] = x[k] + (ak * dt + sk * dw[k])

    u = np.ascontiguousarray(u_spec.sample_series(grid, x_left=x[:-1]), dtype=np.float64)
    for arr in (x, a, sigma, u):
        arr.setflags(write=False)
    return PathRecord(grid=grid, x=x, dw=dw, a=a, sigma=sigma, u=u, seed=seed)


def simulate_seeded(
    a_spec: CoefficientSpec,
    sigma_spec: CoefficientSpec,
    u_spec: CoefficientSpec,
    grid: TimeGrid,
    seed: int,
    x0: float = 0.0,
) -> PathRecord:
    """sample_wiener + simulate_path in one call."""
    return simulate_path(a_spec, sigma_spec, u_spec, grid, sample_wiener(grid, seed), x0, seed)


def coarsen_increments(increments: np.ndarray, factor: int) -> np.ndarray:
    """Merge each run of `factor` consecutive increments into one.

    The coarse increments are summed left to right inside each group, so the
    coarse Wiener path revisits the fine path's values at shared nodes up to
    the reassociation roundoff of the grouped additions.
    """
    dw = np.asarray(increments, dtype=np.float64)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"factor must be a positive integer, got {factor!r}")
    factor = int(factor)
    if len(dw) % factor != 0:
        raise ValueError(f"factor {factor} does not divide increment count {len(dw)}")
    if factor == 1:
        return dw.copy()
    groups = dw.reshape(-1, factor)
    out = groups[:, 0].copy()
    for j in range(1, factor):
        out += groups[:, j]
    return out
