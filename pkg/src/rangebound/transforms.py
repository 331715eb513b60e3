"""Phasor-convolution transforms of a simulated path.

Two variants are built from the same kernel e^{i(x_k - x_j)}:

* the bounded transform, whose (X, Y) pair satisfies the exact node-wise
  envelope sqrt(X^2 + Y^2) <= sum_{j<k} |u_j| dt regardless of the drift;
* the weighted transform, which carries an extra exp(0.5 * (I_k - I_j))
  factor, I being the running left-sum of sigma^2.

Each variant ships in two implementations with identical contracts: a direct
O(N^2) convolution (the reference) and an O(N) recurrence that exploits the
separability e^{i(x_k - x_j)} = e^{i x_k} * e^{-i x_j}. The weighted
recurrence rebases its accumulator periodically so the split exponentials
never leave double range even when the sigma^2 integral is large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import PathRecord, TimeGrid
from .quadrature import CumulativeSeries, ito_cumsum, riemann_cumsum

TWO_PI = 2.0 * np.pi

# Rebase once the oldest retained term is about 1e-150 of the current scale.
RESCALE_THRESHOLD = 345.0

_DIRECT_ROW_BLOCK = 256

# The O(N) recurrences run block by block so their scratch stays cache
# resident; per-element cost is then flat from 1e4 to 1e7 nodes.
_RECURRENCE_BLOCK = 32768


@dataclass(frozen=True, eq=False)
class TransformSeries:
    """Grid-aligned (X, Y) component series; weighted marks the exp-weighted variant."""

    grid: TimeGrid
    X: np.ndarray
    Y: np.ndarray
    weighted: bool

    def modulus(self) -> np.ndarray:
        return np.hypot(self.X, self.Y)


@dataclass(frozen=True)
class PhasorAccumulator:
    """Carry state of the O(N) recurrence at a rebase boundary.

    C and S hold the accumulated cos/sin sums of e^{-(half_I_j - scale_exponent)}
    * trig(x_j) * u_j * dt; I is the sigma^2 left-sum consumed so far.
    Shifting scale_exponent rescales C and S without changing any
    reconstructed value beyond roundoff.
    """

    C: float = 0.0
    S: float = 0.0
    I: float = 0.0
    scale_exponent: float = 0.0


@dataclass(frozen=True, eq=False)
class RotationIdentity:
    """Driftless rotation check: integrand series U, both sides of the
    stochastic-integral identity, and the a-priori range bound when one exists."""

    U: np.ndarray
    lhs: complex
    rhs: complex
    bound: float | None = None


def _half_variance_sum(path: PathRecord) -> np.ndarray:
    return 0.5 * riemann_cumsum(path.sigma * path.sigma, path.grid).values


def bounded_transform_direct(path: PathRecord) -> TransformSeries:
    """O(N^2) reference: X_k = sum_{j<k} cos(x_k - x_j) u_j dt, Y_k likewise with sin."""
    return _direct(path, weighted=False)


def weighted_transform_direct(path: PathRecord) -> TransformSeries:
    """O(N^2) reference for the exp-weighted variant.

    Y slot: sum_{j<k} cos(x_k - x_j) e^{(I_k - I_j)/2} u_j dt;
    X slot: the same sum with -sin. Weights are evaluated from exponent
    differences entry by entry, independently of the separated recurrence.
    """
    return _direct(path, weighted=True)


def _direct(path: PathRecord, weighted: bool) -> TransformSeries:
    n = path.grid.n_steps
    x = path.x
    udt = path.u * path.grid.dt
    half_i = _half_variance_sum(path) if weighted else None
    cos_part = np.zeros(n + 1)
    sin_part = np.zeros(n + 1)
    cols = np.arange(n)
    for r0 in range(1, n + 1, _DIRECT_ROW_BLOCK):
        r1 = min(r0 + _DIRECT_ROW_BLOCK, n + 1)
        j_hi = r1 - 1
        diff = x[r0:r1, None] - x[None, :j_hi]
        terms = udt[None, :j_hi] * (cols[None, :j_hi] < np.arange(r0, r1)[:, None])
        if weighted:
            terms = terms * np.exp(half_i[r0:r1, None] - half_i[None, :j_hi])
        cos_part[r0:r1] = (np.cos(diff) * terms).sum(axis=1)
        sin_part[r0:r1] = (np.sin(diff) * terms).sum(axis=1)
    if weighted:
        X, Y = -sin_part, cos_part
    else:
        X, Y = cos_part, sin_part
    for arr in (X, Y):
        arr.setflags(write=False)
    return TransformSeries(grid=path.grid, X=X, Y=Y, weighted=weighted)


def bounded_transform_recursive(path: PathRecord) -> TransformSeries:
    """O(N) evaluation of the same sums as bounded_transform_direct."""
    X, Y = _recurrence(path, half_i=None, rescale_threshold=RESCALE_THRESHOLD)
    return TransformSeries(grid=path.grid, X=X, Y=Y, weighted=False)


def weighted_transform_recursive(
    path: PathRecord, rescale_threshold: float = RESCALE_THRESHOLD
) -> TransformSeries:
    """O(N) evaluation of the same sums as weighted_transform_direct.

    The accumulator is rebased whenever the sigma^2 half-sum has grown by
    rescale_threshold since the last rebase, so neither the decayed terms nor
    the reconstruction factor can overflow no matter how large the variance
    integral gets.
    """
    half_i = _half_variance_sum(path)
    X, Y = _recurrence(path, half_i=half_i, rescale_threshold=rescale_threshold)
    return TransformSeries(grid=path.grid, X=X, Y=Y, weighted=True)


def _recurrence(
    path: PathRecord, half_i: np.ndarray | None, rescale_threshold: float
) -> tuple[np.ndarray, np.ndarray]:
    """Shared separable-kernel recurrence, evaluated block by block.

    Each block consumes terms e^{-i x_j} w_j u_j dt into the running phasor
    sums and reconstructs the block's nodes from them; w_j is 1 in the
    unweighted case and e^{-(h_j - scale)} in the weighted one, with the
    scale rebased between blocks so no intermediate can overflow.
    """
    n_nodes = path.grid.n_steps + 1
    x = path.x
    u = path.u
    dt = path.grid.dt
    weighted = half_i is not None

    out_x = np.empty(n_nodes)
    out_y = np.empty(n_nodes)
    size = min(_RECURRENCE_BLOCK, n_nodes)
    phase = np.empty(size)
    rot = np.empty(size, dtype=np.complex128)
    terms = np.empty(size, dtype=np.complex128)
    run = np.empty(size + 1, dtype=np.complex128)
    z = np.empty(size, dtype=np.complex128)
    decay = np.empty(size) if weighted else None

    carry = PhasorAccumulator()
    k0 = 0
    while k0 < n_nodes:
        if weighted:
            scale = half_i[k0]
            k1 = int(np.searchsorted(half_i, scale + rescale_threshold, side="right"))
            k1 = max(min(k1, k0 + _RECURRENCE_BLOCK), k0 + 1)
        else:
            scale = 0.0
            k1 = min(k0 + _RECURRENCE_BLOCK, n_nodes)
        m = k1 - k0
        j_hi = min(k1, n_nodes - 1)
        mj = j_hi - k0

        ph = np.mod(x[k0:k1], TWO_PI, out=phase[:m])
        rot_blk = rot[:m]
        np.cos(ph, out=rot_blk.real)
        np.sin(ph, out=rot_blk.imag)

        np.conjugate(rot_blk[:mj], out=terms[:mj])
        terms[:mj] *= u[k0:j_hi]
        terms[:mj] *= dt
        if weighted:
            w = np.subtract(half_i[k0:j_hi], scale, out=decay[:mj])
            np.negative(w, out=w)
            np.exp(w, out=w)
            terms[:mj] *= w

        # stored sums carry a factor e^{scale}; raising the scale multiplies
        # them up, and the reconstruction factor e^{h_k - scale} stays within
        # [1, e^threshold] so it can never overflow on its own
        rebased = complex(carry.C, -carry.S) * (
            np.exp(scale - carry.scale_exponent) if weighted else 1.0
        )
        run[0] = rebased
        np.cumsum(terms[:mj], out=run[1 : mj + 1])
        run[1 : mj + 1] += rebased

        z_blk = np.multiply(rot_blk, run[:m], out=z[:m])
        if weighted:
            lift = np.subtract(half_i[k0:k1], scale, out=phase[:m])
            np.exp(lift, out=lift)
            z_blk *= lift
            z_blk *= 1j
        out_x[k0:k1] = z_blk.real
        out_y[k0:k1] = z_blk.imag

        carry = PhasorAccumulator(
            C=run[mj].real,
            S=-run[mj].imag,
            I=2.0 * half_i[j_hi] if weighted else 0.0,
            scale_exponent=scale,
        )
        k0 = k1

    for arr in (out_x, out_y):
        arr.setflags(write=False)
    return out_x, out_y


def bounded_identity_sides(
    path: PathRecord, ts: TransformSeries
) -> tuple[CumulativeSeries, CumulativeSeries]:
    """Both sides of the bounded transform's stochastic-integral identity.

    lhs_k integrates X against dx; rhs_k = Y_k + 0.5 * left-sum of sigma^2 * Y.
    The two agree up to the discretization error of the underlying scheme.
    """
    if ts.weighted:
        raise ValueError("identity applies to the unweighted transform")
    lhs = ito_cumsum(ts.X[:-1], path)
    correction = riemann_cumsum(path.sigma * path.sigma * ts.Y[:-1], path.grid)
    rhs_values = ts.Y + 0.5 * correction.values
    rhs_values.setflags(write=False)
    return lhs, CumulativeSeries(grid=path.grid, values=rhs_values)


def weighted_identity_sides(
    path: PathRecord, ts: TransformSeries
) -> tuple[CumulativeSeries, np.ndarray]:
    """Both sides of the weighted transform's identity: -int Y dx against the X series."""
    if not ts.weighted:
        raise ValueError("identity applies to the weighted transform")
    raw = ito_cumsum(ts.Y[:-1], path)
    lhs_values = -raw.values
    lhs_values.setflags(write=False)
    return CumulativeSeries(grid=path.grid, values=lhs_values), ts.X


def variance_discounted_u(psi, sigma, grid: TimeGrid) -> np.ndarray:
    """Discount psi by the variance remaining to the horizon.

    u_k = exp(-0.5 * (I_N - I_k)) * psi_k with I the sigma^2 left-sum. Feeding
    this u into the weighted transform keeps its modulus under the running
    left-sum of |psi| at every node.
    """
    psi = np.asarray(psi, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    n = grid.n_steps
    if len(psi) != n or len(sigma) != n:
        raise ValueError(f"psi and sigma must have {n} entries, got {len(psi)} and {len(sigma)}")
    variance_sum = riemann_cumsum(sigma * sigma, grid).values
    return np.exp(-0.5 * (variance_sum[-1] - variance_sum[:-1])) * psi


def _require_driftless(path: PathRecord):
    if np.any(path.a != 0.0):
        raise ValueError("rotation identities require an identically zero drift")


def _complex_prefix(terms: np.ndarray) -> np.ndarray:
    out = np.empty(len(terms) + 1, dtype=np.complex128)
    out[0] = 0.0
    np.cumsum(terms, out=out[1:])
    return out


def unit_rotation_running_sides(path: PathRecord) -> tuple[np.ndarray, np.ndarray]:
    """Running lhs/rhs series of the unit rotation identity over every horizon.

    lhs_k = i * sum_{j<k} sigma_j U_j dw_j with U_j = e^{i(x_j - x_0)};
    rhs_k = U_k - 1 + 0.5 * sum_{j<k} sigma_j^2 U_j dt.
    """
    _require_driftless(path)
    U = np.exp(1j * (path.x - path.x[0]))
    lhs = 1j * _complex_prefix(path.sigma * U[:-1] * path.dw)
    rhs = U - 1.0 + 0.5 * _complex_prefix(path.sigma * path.sigma * U[:-1] * path.grid.dt)
    return lhs, rhs


def scaled_rotation_running_sides(path: PathRecord) -> tuple[np.ndarray, np.ndarray]:
    """Running lhs/rhs series of the scaled rotation identity over every horizon.

    lhs_k = sum_{j<k} sigma_j (i F_j) dw_j with F_j = e^{i(x_j - x_0) + I_j/2};
    rhs_k = F_k - 1.
    """
    _require_driftless(path)
    half_i = _half_variance_sum(path)
    F = np.exp(1j * (path.x - path.x[0]) + half_i)
    lhs = _complex_prefix(path.sigma * (1j * F[:-1]) * path.dw)
    return lhs, F - 1.0


def unit_rotation_identity(path: PathRecord) -> RotationIdentity:
    """Unit-modulus rotation check on a driftless path.

    U_k = e^{i(x_k - x_0)}, and |rhs| never exceeds
    bound = 2 + 0.5 * sum sigma_k^2 dt.
    """
    lhs, rhs = unit_rotation_running_sides(path)
    U = np.exp(1j * (path.x - path.x[0]))
    U.setflags(write=False)
    bound = 2.0 + 0.5 * np.sum(path.sigma * path.sigma) * path.grid.dt
    return RotationIdentity(U=U, lhs=complex(lhs[-1]), rhs=complex(rhs[-1]), bound=float(bound))


def scaled_rotation_identity(path: PathRecord) -> RotationIdentity:
    """Exponentially scaled rotation check on a driftless path.

    U_k = i F_k with F_k = e^{i(x_k - x_0)} e^{I_k / 2}, so |U_k| grows like
    the half-variance exponential.
    """
    lhs, rhs = scaled_rotation_running_sides(path)
    half_i = _half_variance_sum(path)
    U = 1j * np.exp(1j * (path.x - path.x[0]) + half_i)
    U.setflags(write=False)
    return RotationIdentity(U=U, lhs=complex(lhs[-1]), rhs=complex(rhs[-1]), bound=None)
