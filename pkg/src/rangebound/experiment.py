"""Experiment driver: per-seed simulation, CSV emission, manifest, verify suite.

Every run is a pure function of its config: the same config text produces the
same CSV bytes and the same manifest (minus the created_utc line).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_echo_lines
from .engine import PathRecord, build_grid, coarsen_increments, sample_wiener, simulate_path
from .errors import OracleCostError
from .quadrature import ito_cumsum, riemann_cumsum
from .transforms import (
    bounded_identity_sides,
    bounded_transform_recursive,
    scaled_rotation_identity,
    unit_rotation_identity,
    variance_discounted_u,
    weighted_identity_sides,
    weighted_transform_recursive,
)
from .verification import (
    DEFAULT_ORACLE_CEILING,
    check_envelope,
    compare_oracle,
    estimate_order,
    residual_norm,
)

BOUND_TOLERANCE_UNIT = 1e-9
ORACLE_TOLERANCE_UNIT = 1e-10


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass
class ExperimentManifest:
    """Ordered key = value records binding a config to its outputs."""

    entries: list[tuple[str, str]] = field(default_factory=list)

    def add(self, key: str, value) -> None:
        self.entries.append((key, str(value)))

    def get(self, key: str) -> str | None:
        for k, v in self.entries:
            if k == key:
                return v
        return None

    def values(self, key: str) -> list[str]:
        return [v for k, v in self.entries if k == key]

    @property
    def files(self) -> list[str]:
        return [v for k, v in self.entries if k.endswith(".file")]

    @property
    def warnings(self) -> list[str]:
        return self.values("warning")

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.entries)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentManifest":
        manifest = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition(" = ")
            manifest.add(key, value)
        return manifest


def _write_csv(directory: Path, name: str, header: str, columns: list[np.ndarray]) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / name
    length = len(columns[0])
    with open(target, "w", newline="\n") as handle:
        handle.write(header + "\n")
        for i in range(length):
            handle.write(",".join(_fmt(col[i]) for col in columns) + "\n")
    return target


def prepare_path(config: ExperimentConfig, seed: int) -> PathRecord:
    """Simulate one seed's path, applying the variance discount when psi is set."""
    grid = build_grid(config.t_max, config.n_steps)
    increments = sample_wiener(grid, seed)
    u_spec = config.u_spec if config.u_spec is not None else config.psi_spec
    path = simulate_path(
        config.a_spec, config.sigma_spec, u_spec, grid, increments, config.x0, seed
    )
    if config.uses_discounted_u:
        psi = config.psi_spec.sample_series(grid, x_left=path.x[:-1])
        path = path.with_u(variance_discounted_u(psi, path.sigma, grid))
    return path


def integrand_envelope(config: ExperimentConfig, path: PathRecord):
    """The node-wise envelope the transform modulus must stay under.

    With a plain u this is the left-sum of |u|; with psi it is the left-sum of
    |psi|, which dominates the weighted transform of the discounted u.
    """
    if config.uses_discounted_u:
        psi = config.psi_spec.sample_series(path.grid, x_left=path.x[:-1])
        return riemann_cumsum(np.abs(psi), path.grid)
    return riemann_cumsum(np.abs(path.u), path.grid)


def bound_tolerance(envelope) -> float:
    return BOUND_TOLERANCE_UNIT * (1.0 + float(envelope.values[-1]))


def _oracle_tolerance(path: PathRecord, which: str) -> float:
    scale = float(np.sum(np.abs(path.u)) * path.grid.dt)
    if which == "weighted":
        total_variance = float(np.sum(path.sigma * path.sigma) * path.grid.dt)
        scale *= float(np.exp(0.5 * total_variance))
    return ORACLE_TOLERANCE_UNIT * (1.0 + scale)


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    convergence_levels: int = 4,
    oracle_ceiling: int = DEFAULT_ORACLE_CEILING,
) -> ExperimentManifest:
    """Simulate every seed, write the requested CSV series, and write manifest.txt."""
    root = Path(out_dir if out_dir is not None else config.output_dir)
    root.mkdir(parents=True, exist_ok=True)

    manifest = ExperimentManifest()
    manifest.add("tool", f"rangebound {__version__}")
    manifest.add("created_utc", datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"))
    for line in config_echo_lines(config):
        key, _, value = line.partition(" = ")
        manifest.add(key, value)

    warnings: list[str] = []
    for seed in config.seeds:
        seed_dir = root / f"seed{seed}"
        path = prepare_path(config, seed)
        t = path.grid.nodes
        written: list[str] = []
        summaries: list[tuple[str, str]] = []

        ts1 = ts2 = None
        if {"t1", "identities", "bounds"} & config.outputs:
            ts1 = bounded_transform_recursive(path)
        if {"t2", "identities"} & config.outputs or (
            "bounds" in config.outputs and config.uses_discounted_u
        ):
            ts2 = weighted_transform_recursive(path)

        if "path" in config.outputs:
            written.append(_write_csv(seed_dir, "x.csv", "t,x", [t, path.x]).name)
        if "t1" in config.outputs:
            written.append(_write_csv(seed_dir, "t1.csv", "t,X,Y", [t, ts1.X, ts1.Y]).name)
        if "t2" in config.outputs:
            written.append(_write_csv(seed_dir, "t2.csv", "t,X,Y", [t, ts2.X, ts2.Y]).name)

        if "identities" in config.outputs:
            lhs1, rhs1 = bounded_identity_sides(path, ts1)
            written.append(
                _write_csv(
                    seed_dir, "identity_t1.csv", "t,lhs,rhs", [t, lhs1.values, rhs1.values]
                ).name
            )
            summaries.append(("identity_t1.residual", _fmt(residual_norm(lhs1, rhs1))))
            lhs2, rhs2 = weighted_identity_sides(path, ts2)
            written.append(
                _write_csv(seed_dir, "identity_t2.csv", "t,lhs,rhs", [t, lhs2.values, rhs2]).name
            )
            summaries.append(("identity_t2.residual", _fmt(residual_norm(lhs2, rhs2))))
            if path.grid.n_steps <= oracle_ceiling:
                for which in ("bounded", "weighted"):
                    summaries.append(
                        (f"oracle.{which}.deviation", _fmt(compare_oracle(path, which, oracle_ceiling)))
                    )
            else:
                warnings.append(
                    f"seed {seed}: direct oracle skipped ({path.grid.n_steps} steps exceeds "
                    f"ceiling {oracle_ceiling}); identities checked recursive-only"
                )

        if "remarks" in config.outputs:
            if np.any(path.a != 0.0):
                warnings.append(f"seed {seed}: remarks skipped: drift is not identically zero")
            else:
                rot1 = unit_rotation_identity(path)
                rot2 = scaled_rotation_identity(path)
                written.append(
                    _write_csv(
                        seed_dir, "rotation_unit.csv", "t,re,im", [t, rot1.U.real, rot1.U.imag]
                    ).name
                )
                written.append(
                    _write_csv(
                        seed_dir, "rotation_scaled.csv", "t,re,im", [t, rot2.U.real, rot2.U.imag]
                    ).name
                )
                summaries.append(("rotation_unit.rhs_abs", _fmt(abs(rot1.rhs))))
                summaries.append(("rotation_unit.bound", _fmt(rot1.bound)))
                summaries.append(("rotation_unit.residual", _fmt(abs(rot1.lhs - rot1.rhs))))
                summaries.append(("rotation_scaled.residual", _fmt(abs(rot2.lhs - rot2.rhs))))

        if "bounds" in config.outputs:
            envelope = integrand_envelope(config, path)
            target = ts2 if config.uses_discounted_u else ts1
            label = "bound_t2" if config.uses_discounted_u else "bound_t1"
            report = check_envelope(target, envelope, bound_tolerance(envelope))
            written.append(
                _write_csv(
                    seed_dir,
                    f"{label}.csv",
                    "t,modulus,envelope",
                    [t, target.modulus(), envelope.values],
                ).name
            )
            summaries.append((f"{label}.max_violation", _fmt(report.max_violation)))
            summaries.append((f"{label}.violation_index", str(report.violation_index)))
            summaries.append((f"{label}.tolerance", _fmt(report.tolerance_used)))
            summaries.append((f"{label}.passed", str(report.passed).lower()))

        if "convergence" in config.outputs:
            span = 2 ** (convergence_levels - 1)
            if convergence_levels < 3 or path.grid.n_steps % span != 0:
                warnings.append(
                    f"seed {seed}: convergence skipped: n_steps {path.grid.n_steps} does not "
                    f"support {convergence_levels} refinement levels"
                )
            else:
                for identity in ("bounded", "weighted"):
                    report = estimate_order(
                        path.dw,
                        t_max=config.t_max,
                        a_spec=config.a_spec,
                        sigma_spec=config.sigma_spec,
                        u_spec=config.u_spec if config.u_spec is not None else config.psi_spec,
                        x0=config.x0,
                        refinement_levels=convergence_levels,
                        identity=identity,
                    )
                    key = f"convergence.{identity}"
                    summaries.append((f"{key}.grids", ",".join(str(g) for g in report.grid_sizes)))
                    summaries.append(
                        (f"{key}.residuals", ",".join(_fmt(r) for r in report.residual_norms))
                    )
                    summaries.append((f"{key}.median_order", _fmt(report.median_order)))

        for name in sorted(written):
            manifest.add(f"seed.{seed}.file", f"seed{seed}/{name}")
        for key, value in summaries:
            manifest.add(f"seed.{seed}.{key}", value)

    for warning in warnings:
        manifest.add("warning", warning)

    with open(root / "manifest.txt", "w", newline="\n") as handle:
        handle.write(manifest.to_text())
    return manifest


FIGURE_NAMES = (
    "fig1_x.csv",
    "fig2_X.csv",
    "fig3_Y.csv",
    "fig4_XY.csv",
    "fig5_modZ.csv",
    "fig6_intXdx.csv",
)


def emit_figures(config: ExperimentConfig, out_dir: str | Path | None = None) -> list[Path]:
    """Emit the six reference series for the first configured seed.

    fig1 x(t); fig2/fig3 the transform components; fig4 the (X, Y) locus;
    fig5 the modulus; fig6 the running integral of X against dx.
    """
    root = Path(out_dir if out_dir is not None else config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    path = prepare_path(config, config.seeds[0])
    ts = bounded_transform_recursive(path)
    t = path.grid.nodes
    running = ito_cumsum(ts.X[:-1], path)
    files = [
        _write_csv(root, FIGURE_NAMES[0], "t,value", [t, path.x]),
        _write_csv(root, FIGURE_NAMES[1], "t,value", [t, ts.X]),
        _write_csv(root, FIGURE_NAMES[2], "t,value", [t, ts.Y]),
        _write_csv(root, FIGURE_NAMES[3], "t,X,Y", [t, ts.X, ts.Y]),
        _write_csv(root, FIGURE_NAMES[4], "t,value", [t, ts.modulus()]),
        _write_csv(root, FIGURE_NAMES[5], "t,value", [t, running.values]),
    ]
    return files


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class VerificationSummary:
    checks: list[VerificationCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(not c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks
        ]
        out.extend(f"NOTE {n}" for n in self.notes)
        return out


def _oracle_scale_path(config: ExperimentConfig, path: PathRecord, ceiling: int) -> PathRecord | None:
    """A cheaper path on the same noise when the config grid is above the ceiling."""
    n = path.grid.n_steps
    if n <= ceiling:
        return path
    for factor in range(-(-n // ceiling), n + 1):
        if n % factor == 0:
            break
    else:
        return None
    grid = build_grid(config.t_max, n // factor)
    u_spec = config.u_spec if config.u_spec is not None else config.psi_spec
    coarse = simulate_path(
        config.a_spec,
        config.sigma_spec,
        u_spec,
        grid,
        coarsen_increments(path.dw, factor),
        config.x0,
        path.seed,
    )
    if config.uses_discounted_u:
        psi = config.psi_spec.sample_series(grid, x_left=coarse.x[:-1])
        coarse = coarse.with_u(variance_discounted_u(psi, coarse.sigma, grid))
    return coarse


def verify_suite(
    config: ExperimentConfig,
    convergence_levels: int = 4,
    oracle_ceiling: int = DEFAULT_ORACLE_CEILING,
) -> VerificationSummary:
    """Run envelope, identity, equivalence, and convergence checks for a config.

    Envelope and equivalence checks gate pass/fail; identity residuals and
    estimated orders are reported as notes since their size is grid-dependent.
    """
    summary = VerificationSummary()
    for seed in config.seeds:
        path = prepare_path(config, seed)

        u_envelope = riemann_cumsum(np.abs(path.u), path.grid)
        ts1 = bounded_transform_recursive(path)
        report = check_envelope(ts1, u_envelope, bound_tolerance(u_envelope))
        summary.checks.append(
            VerificationCheck(
                f"bound[t1] seed={seed}",
                report.passed,
                f"max_violation={report.max_violation:.3e} tolerance={report.tolerance_used:.3e}",
            )
        )
        if config.uses_discounted_u:
            envelope = integrand_envelope(config, path)
            ts2 = weighted_transform_recursive(path)
            report2 = check_envelope(ts2, envelope, bound_tolerance(envelope))
            summary.checks.append(
                VerificationCheck(
                    f"bound[t2] seed={seed}",
                    report2.passed,
                    f"max_violation={report2.max_violation:.3e} tolerance={report2.tolerance_used:.3e}",
                )
            )

        if np.all(path.a == 0.0):
            rot = unit_rotation_identity(path)
            margin = abs(rot.rhs) - rot.bound
            rot_tol = BOUND_TOLERANCE_UNIT * (1.0 + rot.bound)
            summary.checks.append(
                VerificationCheck(
                    f"bound[rotation] seed={seed}",
                    margin <= rot_tol,
                    f"|rhs|-bound={margin:.3e} tolerance={rot_tol:.3e}",
                )
            )

        oracle_path = _oracle_scale_path(config, path, oracle_ceiling)
        if oracle_path is None:
            summary.notes.append(f"oracle seed={seed}: no divisor fits under ceiling, skipped")
        else:
            for which in ("bounded", "weighted"):
                try:
                    deviation = compare_oracle(oracle_path, which, oracle_ceiling)
                except OracleCostError:
                    summary.notes.append(f"oracle[{which}] seed={seed}: refused, skipped")
                    continue
                otol = _oracle_tolerance(oracle_path, which)
                summary.checks.append(
                    VerificationCheck(
                        f"oracle[{which}] seed={seed} n={oracle_path.grid.n_steps}",
                        deviation <= otol,
                        f"deviation={deviation:.3e} tolerance={otol:.3e}",
                    )
                )

        for identity in ("bounded", "weighted"):
            summary.notes.append(
                f"identity[{identity}] seed={seed}: residual="
                f"{residual_norm(*_identity_sides_for(path, identity)):.6e}"
            )

        span = 2 ** (convergence_levels - 1)
        if convergence_levels >= 3 and path.grid.n_steps % span == 0:
            for identity in ("bounded", "weighted"):
                report = estimate_order(
                    path.dw,
                    t_max=config.t_max,
                    a_spec=config.a_spec,
                    sigma_spec=config.sigma_spec,
                    u_spec=config.u_spec if config.u_spec is not None else config.psi_spec,
                    x0=config.x0,
                    refinement_levels=convergence_levels,
                    identity=identity,
                )
                summary.notes.append(
                    f"convergence[{identity}] seed={seed}: median_order="
                    f"{report.median_order:.3f} residuals="
                    + ",".join(f"{r:.3e}" for r in report.residual_norms)
                )
        else:
            summary.notes.append(
                f"convergence seed={seed}: skipped, n_steps {path.grid.n_steps} does not "
                f"support {convergence_levels} levels"
            )
    return summary


def _identity_sides_for(path: PathRecord, identity: str):
    if identity == "bounded":
        return bounded_identity_sides(path, bounded_transform_recursive(path))
    lhs, rhs = weighted_identity_sides(path, weighted_transform_recursive(path))
    return lhs, rhs
