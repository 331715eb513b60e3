import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rangebound as rb
from rangebound import CoefficientSpec
from rangebound.errors import ConfigurationError

const = CoefficientSpec.constant


class TestBuildGrid:
    def test_unit_steps(self):
        grid = rb.build_grid(5.0, 5)
        assert grid.dt == 1.0
        assert np.array_equal(grid.nodes, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])

    def test_fine_grid(self):
        grid = rb.build_grid(5.0, 100_000)
        assert grid.dt == 5e-5
        assert grid.n_steps == 100_000
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == 5.0

    def test_minimal_grid(self):
        grid = rb.build_grid(1.0, 1)
        assert np.array_equal(grid.nodes, [0.0, 1.0])

    @pytest.mark.parametrize("t_max,n_steps", [(0.0, 10), (-1.0, 10), (5.0, 0), (5.0, -3)])
    def test_rejects_non_positive(self, t_max, n_steps):
        with pytest.raises(ValueError):
            rb.build_grid(t_max, n_steps)

    def test_rejects_fractional_steps(self):
        with pytest.raises(ValueError):
            rb.build_grid(1.0, 2.5)

    @pytest.mark.parametrize("t_max,n_steps", [(5.0, 7), (0.3, 11), (2.7, 1000)])
    def test_dt_times_n_matches_horizon(self, t_max, n_steps):
        grid = rb.build_grid(t_max, n_steps)
        assert abs(grid.dt * n_steps - t_max) <= math.ulp(t_max)


class TestSampleWiener:
    def test_deterministic_for_seed(self):
        grid = rb.build_grid(5.0, 1000)
        assert np.array_equal(rb.sample_wiener(grid, 42), rb.sample_wiener(grid, 42))

    def test_seed_sensitivity(self):
        grid = rb.build_grid(5.0, 1000)
        assert np.any(rb.sample_wiener(grid, 7) != rb.sample_wiener(grid, 8))

    def test_increment_variance(self):
        grid = rb.build_grid(5.0, 100_000)
        dw = rb.sample_wiener(grid, 12345)
        assert abs(np.var(dw) / grid.dt - 1.0) < 0.05


class TestSimulatePath:
    def test_constant_path(self):
        grid = rb.build_grid(5.0, 100)
        path = rb.simulate_seeded(const(0), const(0), const(1), grid, seed=1, x0=1.0)
        assert np.all(path.x == 1.0)

    def test_pure_drift(self):
        grid = rb.build_grid(5.0, 10_000)
        path = rb.simulate_seeded(const(2), const(0), const(1), grid, seed=1)
        assert abs(path.x[-1] - 10.0) < 1e-9

    def test_drift_only_exactness_along_path(self):
        grid = rb.build_grid(5.0, 10_000)
        path = rb.simulate_seeded(const(2), const(0), const(1), grid, seed=1, x0=0.5)
        assert np.max(np.abs(path.x - (0.5 + 2.0 * grid.nodes))) < 1e-9

    def test_record_is_self_consistent_bitwise(self):
        grid = rb.build_grid(5.0, 5000)
        path = rb.simulate_seeded(const(2), const(1), const(1), grid, seed=3)
        dt = grid.dt
        expected = path.x[:-1] + (path.a * dt + path.sigma * path.dw)
        assert np.array_equal(path.x[1:], expected)

    def test_state_dependent_record_consistency(self):
        grid = rb.build_grid(2.0, 500)
        path = rb.simulate_seeded(
            CoefficientSpec.state_bounded(2.0), const(1), const(1), grid, seed=5
        )
        assert np.array_equal(path.a, 2.0 / (1.0 + path.x[:-1] ** 2))
        expected = path.x[:-1] + (path.a * grid.dt + path.sigma * path.dw)
        assert np.array_equal(path.x[1:], expected)

    def test_series_lengths(self):
        grid = rb.build_grid(1.0, 17)
        path = rb.simulate_seeded(const(1), const(1), const(1), grid, seed=2)
        assert len(path.x) == 18
        assert len(path.dw) == len(path.a) == len(path.sigma) == len(path.u) == 17

    def test_sinusoid_sampled_at_left_nodes(self):
        grid = rb.build_grid(3.0, 300)
        spec = CoefficientSpec.sinusoid(1.0, 0.5, 2.0)
        path = rb.simulate_seeded(spec, const(1), spec, grid, seed=2)
        assert np.allclose(path.a, 1.0 + 0.5 * np.sin(2.0 * grid.nodes[:-1]), atol=0, rtol=0)

    def test_increment_length_mismatch(self):
        grid = rb.build_grid(1.0, 10)
        with pytest.raises(ValueError):
            rb.simulate_path(const(1), const(1), const(1), grid, np.zeros(9))

    def test_samples_length_mismatch(self):
        grid = rb.build_grid(1.0, 10)
        bad = CoefficientSpec.from_samples(np.ones(7))
        with pytest.raises(ConfigurationError):
            rb.simulate_path(bad, const(1), const(1), grid, np.zeros(10))

    def test_samples_series_stored(self):
        grid = rb.build_grid(1.0, 8)
        values = np.linspace(-1.0, 1.0, 8)
        path = rb.simulate_path(
            const(0), const(0), CoefficientSpec.from_samples(values), grid, np.zeros(8)
        )
        assert np.array_equal(path.u, values)

    def test_determinism_of_full_record(self):
        grid = rb.build_grid(5.0, 2000)
        a = CoefficientSpec.sinusoid(0.5, 1.5, 3.0)
        one = rb.simulate_seeded(a, const(1), const(1), grid, seed=11)
        two = rb.simulate_seeded(a, const(1), const(1), grid, seed=11)
        for left, right in ((one.x, two.x), (one.dw, two.dw), (one.u, two.u)):
            assert np.array_equal(left, right)

    def test_batch_mean_is_unbiased(self):
        grid = rb.build_grid(1.0, 64)
        finals = [
            rb.simulate_seeded(const(0), const(1), const(1), grid, seed=1000 + i).x[-1]
            for i in range(1000)
        ]
        assert abs(np.mean(finals)) < 4.0 * math.sqrt(1.0) / math.sqrt(1000)


class TestCoarsenIncrements:
    def test_identity_factor(self):
        dw = np.array([0.1, 0.2, -0.3, 0.4])
        assert np.array_equal(rb.coarsen_increments(dw, 1), dw)

    def test_pairwise_sums(self):
        dw = np.array([0.1, 0.2, -0.3, 0.4])
        coarse = rb.coarsen_increments(dw, 2)
        assert np.array_equal(coarse, [0.1 + 0.2, -0.3 + 0.4])

    def test_non_divisor_rejected(self):
        with pytest.raises(ValueError):
            rb.coarsen_increments(np.zeros(10), 3)

    def test_cumulative_sums_agree_at_shared_nodes(self):
        grid = rb.build_grid(5.0, 10_000)
        dw = rb.sample_wiener(grid, 9)
        coarse = rb.coarsen_increments(dw, 2)
        assert np.max(np.abs(np.cumsum(dw)[1::2] - np.cumsum(coarse))) < 1e-12

    @settings(deadline=None, max_examples=30)
    @given(
        seed=st.integers(min_value=0, max_value=2**31),
        factor=st.sampled_from([1, 2, 4, 8, 16]),
    )
    def test_coarsening_consistency_property(self, seed, factor):
        grid = rb.build_grid(2.0, 512)
        dw = rb.sample_wiener(grid, seed)
        coarse = rb.coarsen_increments(dw, factor)
        shared = np.cumsum(dw)[factor - 1 :: factor]
        assert np.max(np.abs(shared - np.cumsum(coarse))) < 1e-12
