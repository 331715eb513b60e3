import numpy as np
import pytest

import rangebound as rb
from rangebound import CoefficientSpec
from rangebound.errors import OracleCostError
from rangebound.transforms import TransformSeries

const = CoefficientSpec.constant


def make_series(grid, X, Y, weighted=False):
    return TransformSeries(grid=grid, X=np.asarray(X, float), Y=np.asarray(Y, float), weighted=weighted)


class TestCheckEnvelope:
    def test_zero_series_passes(self):
        grid = rb.build_grid(1.0, 10)
        ts = make_series(grid, np.zeros(11), np.zeros(11))
        envelope = rb.riemann_cumsum(np.ones(10), grid)
        report = rb.check_envelope(ts, envelope, 1e-9)
        assert report.passed
        assert report.max_violation <= 0.0

    def test_corrupted_node_is_located(self):
        grid = rb.build_grid(5.0, 200)
        path = rb.simulate_seeded(const(2), const(1), const(1), grid, seed=1)
        ts = rb.bounded_transform_recursive(path)
        X = ts.X.copy()
        X[5] += 1.0
        corrupted = make_series(grid, X, ts.Y)
        envelope = rb.riemann_cumsum(np.abs(path.u), grid)
        report = rb.check_envelope(corrupted, envelope, 1e-9)
        assert not report.passed
        assert report.violation_index == 5
        assert report.max_violation > 0.5

    def test_grid_mismatch_rejected(self):
        ts = make_series(rb.build_grid(1.0, 10), np.zeros(11), np.zeros(11))
        envelope = rb.riemann_cumsum(np.ones(20), rb.build_grid(1.0, 20))
        with pytest.raises(ValueError):
            rb.check_envelope(ts, envelope, 1e-9)

    def test_passed_flag_tracks_tolerance(self):
        grid = rb.build_grid(1.0, 4)
        ts = make_series(grid, [0, 1, 0, 0, 0], np.zeros(5))
        envelope = np.zeros(5)
        assert not rb.check_envelope(ts, envelope, 0.5).passed
        assert rb.check_envelope(ts, envelope, 1.5).passed


class TestResidualNorm:
    def test_identical_series(self):
        v = np.linspace(0, 1, 50)
        assert rb.residual_norm(v, v) == 0.0

    def test_constant_offset(self):
        v = np.linspace(0, 1, 50)
        assert rb.residual_norm(v, v + 1e-3) == pytest.approx(1e-3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rb.residual_norm(np.zeros(5), np.zeros(6))

    def test_refinement_reduces_identity_residual(self):
        fine_grid = rb.build_grid(5.0, 20_000)
        dw = rb.sample_wiener(fine_grid, 1)
        fine = rb.simulate_path(const(2), const(1), const(1), fine_grid, dw)
        coarse = rb.simulate_path(
            const(2), const(1), const(1), rb.build_grid(5.0, 10_000), rb.coarsen_increments(dw, 2)
        )
        r_coarse = rb.identity_residual(coarse, "bounded")
        r_fine = rb.identity_residual(fine, "bounded")
        assert 0.0 < r_fine < r_coarse


class TestOrders:
    def test_geometric_residuals(self):
        assert rb.orders_from_residuals([0.04, 0.02, 0.01]) == pytest.approx([1.0, 1.0])

    def test_stagnation(self):
        assert rb.orders_from_residuals([0.3, 0.3, 0.3]) == pytest.approx([0.0, 0.0])

    def test_estimate_order_end_to_end(self):
        grid = rb.build_grid(5.0, 2**12)
        report = rb.estimate_order(
            rb.sample_wiener(grid, 1),
            t_max=5.0,
            a_spec=const(2),
            sigma_spec=const(1),
            u_spec=const(1),
            refinement_levels=4,
            identity="bounded",
        )
        assert report.grid_sizes == (512, 1024, 2048, 4096)
        assert all(r > 0 for r in report.residual_norms)
        assert len(report.estimated_orders) == 3
        assert np.isfinite(report.median_order)
        assert report.residual_norms[0] > report.residual_norms[-1]

    def test_estimate_order_rotation_identity(self):
        report = rb.estimate_order(
            rb.sample_wiener(rb.build_grid(5.0, 2**12), 2),
            t_max=5.0,
            a_spec=const(0),
            sigma_spec=const(1),
            u_spec=const(1),
            refinement_levels=3,
            identity="unit_rotation",
        )
        assert len(report.residual_norms) == 3
        assert all(np.isfinite(r) for r in report.residual_norms)

    def test_divisibility_enforced(self):
        with pytest.raises(ValueError):
            rb.estimate_order(
                np.zeros(1002),
                t_max=1.0,
                a_spec=const(0),
                sigma_spec=const(1),
                u_spec=const(1),
                refinement_levels=4,
            )

    def test_minimum_levels(self):
        with pytest.raises(ValueError):
            rb.estimate_order(
                np.zeros(1024),
                t_max=1.0,
                a_spec=const(0),
                sigma_spec=const(1),
                u_spec=const(1),
                refinement_levels=2,
            )

    def test_unknown_identity(self):
        grid = rb.build_grid(1.0, 16)
        path = rb.simulate_seeded(const(0), const(1), const(1), grid, seed=1)
        with pytest.raises(ValueError):
            rb.identity_residual(path, "nope")


class TestCompareOracle:
    def test_zero_integrand(self):
        grid = rb.build_grid(5.0, 500)
        path = rb.simulate_seeded(const(2), const(1), const(0), grid, seed=1)
        assert rb.compare_oracle(path, "bounded") == 0.0
        assert rb.compare_oracle(path, "weighted") == 0.0

    def test_random_instance_within_tolerance(self):
        grid = rb.build_grid(5.0, 2000)
        path = rb.simulate_seeded(const(-7), const(1.2), const(1), grid, seed=5)
        scale = 1 + np.sum(np.abs(path.u)) * grid.dt
        assert rb.compare_oracle(path, "bounded") <= 1e-10 * scale

    def test_ceiling_refusal(self):
        grid = rb.build_grid(5.0, 4001)
        path = rb.simulate_seeded(const(1), const(1), const(1), grid, seed=1)
        with pytest.raises(OracleCostError):
            rb.compare_oracle(path, "bounded")
        assert rb.compare_oracle(path, "bounded", ceiling=5000) >= 0.0

    def test_stress_weighted_finite(self):
        grid = rb.build_grid(50.0, 500)
        path = rb.simulate_seeded(const(0.5), const(3), const(1), grid, seed=7)
        deviation = rb.compare_oracle(path, "weighted")
        total_variance = np.sum(path.sigma**2) * grid.dt
        scale = 1 + np.exp(0.5 * total_variance) * np.sum(np.abs(path.u)) * grid.dt
        assert np.isfinite(deviation)
        assert deviation <= 1e-10 * scale

    def test_unknown_transform_name(self):
        grid = rb.build_grid(1.0, 16)
        path = rb.simulate_seeded(const(0), const(1), const(1), grid, seed=1)
        with pytest.raises(ValueError):
            rb.compare_oracle(path, "fancy")
