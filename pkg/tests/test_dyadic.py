"""Test the Littlewood-Paley decomposition and the Besov norms"""
import numpy as np
import pytest
from scipy import integrate
from modules.debug.errors import ConfigurationError, PreconditionError, RangeError, ValidationError
from modules.experiments.verify import (almost_orthogonality_check, bernstein_sweep, lp_verify, partition_of_unity_check,
                                        reconstruction_check, sobolev_suite)
from modules.spectral.dyadic import (bernstein_ratio, besov_norm, block, block_norms, build_partition, bump,
                                     chemin_lerner_norm, composition_estimate_check, derivative_equivalence_check,
                                     dyadic_multiplier, embedding_check, linf_embedding_check,
                                     plain_time_norm, product_estimate_check, space_equivalence_check)
from modules.spectral.grid import PeriodicGrid, ScalarField, Trajectory
from modules.spectral.sampling import pure_mode, random_smooth_field, random_trajectory, unit_l2


class TestPartition:

    def test_bump_support(self):
        """Tests that phi_0 vanishes outside the annulus and is positive inside
        """
        assert bump(np.array([0.5]))[0] == 0
        assert bump(np.array([1.0]))[0] > 0
        assert np.all(bump(np.linspace(0.76, 2.66, 50)) > 0)

    def test_partition_of_unity(self, grid, small_grid, grid_2d):
        """Tests the homogeneous and inhomogeneous partitions of unity on the resolved lattice
        """
        for mesh in (grid, small_grid, grid_2d):
            report = partition_of_unity_check(mesh)
            assert report.passed
            assert report.value["homogeneous"] < 1e-12
            assert report.value["inhomogeneous"] < 1e-12

    def test_scaling(self):
        """Tests that F Phi_q(r) = F Phi_0(2^-q r) holds bit for bit
        """
        radius = np.linspace(0.01, 300, 4001)
        for q in range(-3, 7):
            assert np.array_equal(dyadic_multiplier(q, radius), dyadic_multiplier(0, np.ldexp(radius, -q)))

    def test_coarse_grid(self):
        """Tests that a grid hosting fewer than three blocks is a configuration error
        """
        with pytest.raises(ConfigurationError) as info:
            build_partition(PeriodicGrid(1, 8))
        assert info.value.field == "grid.points"

    def test_range(self, grid):
        """Tests the homogeneous range error and the empty inhomogeneous blocks below -1
        """
        partition = build_partition(grid)
        f = pure_mode(grid, [3])
        with pytest.raises(RangeError):
            block(f, partition.q_max + 1)
        assert block(f, -2, homogeneous=False).norm(2) == 0


class TestBlocks:

    def test_pure_mode(self, grid, expected):
        """Tests that a mode where only one multiplier is active is reproduced by its block alone
        """
        example = expected['pure_mode']
        q0 = example['block']
        f = pure_mode(grid, [example['wavenumber']])
        assert np.allclose(block(f, q0).values, f.values, atol=1e-12)
        for q, value in block_norms(f):
            if abs(q - q0) >= 2:
                assert value < 1e-12 * f.norm(2)

    def test_pure_mode_norm(self, grid, expected):
        """Tests the norm of a unit pure mode with a single active block
        """
        example = expected['pure_mode']
        f = unit_l2(pure_mode(grid, [example['wavenumber']]))
        norm = besov_norm(f, example['s'], 2, 1, homogeneous=True)
        assert norm.value == pytest.approx(example['norm'], rel=1e-10)
        assert norm.value == pytest.approx(sum(value for _, value in norm.per_block), rel=1e-14)

    def test_constant(self, grid):
        """Tests the blocks of a constant field
        """
        f = ScalarField.constant(grid, 2.5)
        assert besov_norm(f, 1.0, 2, 2, homogeneous=True).value < 1e-12
        assert np.allclose(block(f, -1, homogeneous=False).values, 2.5, atol=1e-14)
        for q in build_partition(grid).homogeneous_range:
            assert block(f, q).norm(np.inf) < 1e-13

    def test_two_blocks(self, grid, expected):
        """Tests the l^1 and l^inf sums of two blocks of equal norm
        """
        low, high = expected['two_blocks']['wavenumbers']
        f = pure_mode(grid, [low]) + pure_mode(grid, [high])
        b = pure_mode(grid, [low]).norm(2)
        assert besov_norm(f, 0, 2, 1, homogeneous=True).value == pytest.approx(2 * b, rel=1e-10)
        assert besov_norm(f, 0, 2, np.inf, homogeneous=True).value == pytest.approx(b, rel=1e-10)

    def test_scaling_shift(self, grid, rng):
        """Tests that doubling the frequencies shifts the homogeneous block sequence by one block
        """
        x = grid.coordinates()[0]
        amplitudes = rng.standard_normal(20)
        phases = rng.uniform(0, 2 * np.pi, 20)
        f = ScalarField(grid, sum(a * np.cos(k * x + p) for k, a, p in zip(range(1, 21), amplitudes, phases)))
        f2 = ScalarField(grid, sum(a * np.cos(2 * k * x + p) for k, a, p in zip(range(1, 21), amplitudes, phases)))
        coarse = dict(block_norms(f))
        fine = dict(block_norms(f2))
        for q, value in coarse.items():
            if q + 1 in fine:
                assert fine[q + 1] == pytest.approx(value, rel=1e-10, abs=1e-12)

    def test_reconstruction(self, grid, rng):
        """Tests that the inhomogeneous blocks sum back to the field
        """
        f = random_smooth_field(grid, rng, mean=0.7)
        assert reconstruction_check(f).passed

    def test_almost_orthogonality(self, grid_2d, rng):
        """Tests that blocks two indices apart do not interact
        """
        assert almost_orthogonality_check(random_smooth_field(grid_2d, rng)).passed

    def test_exponents(self, grid):
        """Tests that unsupported exponents are rejected
        """
        f = pure_mode(grid, [3])
        with pytest.raises(PreconditionError):
            besov_norm(f, 1, p=1)
        with pytest.raises(PreconditionError):
            besov_norm(f, 1, r=0.5)


class TestTimeNorms:

    def test_constant_in_time(self, grid, rng):
        """Tests that the L^inf tilde norm of a constant trajectory is the norm of the snapshot
        """
        f = random_smooth_field(grid, rng)
        traj = Trajectory([0.0, 0.5, 1.0], [f, f, f])
        assert chemin_lerner_norm(traj, np.inf, 1.5, 2, 1, homogeneous=False).value == pytest.approx(
            besov_norm(f, 1.5, 2, 1).value, rel=1e-14)

    def test_separable(self, grid, expected):
        """Tests the L^2 tilde norm of a(t) times a unit pure mode
        """
        example = expected['pure_mode']
        f = unit_l2(pure_mode(grid, [example['wavenumber']]))
        times = np.linspace(0, 1, 41)
        weights = 1 + 0.5 * np.sin(3 * times)
        traj = Trajectory(times, [f * a for a in weights])
        expected_value = 2**(example['block'] * 1.5) * np.sqrt(integrate.trapezoid(weights**2, x=times))
        assert chemin_lerner_norm(traj, 2, 1.5, 2, 1).value == pytest.approx(expected_value, rel=1e-10)

    def test_minkowski(self, grid, rng):
        """Tests that the tilde norm with r <= theta dominates the plain time norm
        """
        traj = random_trajectory(grid, rng, np.linspace(0, 2, 21))
        tilde = chemin_lerner_norm(traj, 2, 1.0, 2, 1, homogeneous=False).value
        assert tilde >= plain_time_norm(traj, 2, 1.0, 2, 1, homogeneous=False) * (1 - 1e-12)

    def test_single_snapshot(self, grid):
        """Tests that a time integral over one snapshot is a configuration error
        """
        traj = Trajectory([0.0], [pure_mode(grid, [2])])
        with pytest.raises(ConfigurationError):
            chemin_lerner_norm(traj, 2, 1.0)
        assert chemin_lerner_norm(traj, np.inf, 1.0).value > 0

    def test_space_equivalence(self, grid, rng):
        """Tests the zero trajectory, the hypothesis of the comparison and a finite fitted constant
        """
        zero = Trajectory([0.0, 1.0], [ScalarField.zeros(grid)] * 2)
        report = space_equivalence_check(zero, 2, 1.0, 2, 1)
        assert report.value["lp"] == report.value["homogeneous"] == report.value["inhomogeneous"] == 0
        with pytest.raises(PreconditionError):
            space_equivalence_check(zero, 1, 1.0, 2, 2)
        traj = random_trajectory(grid, rng, np.linspace(0, 1, 11))
        assert np.isfinite(space_equivalence_check(traj, 2, 1.0, 2, 1).value["fitted_constant"])


class TestInequalities:

    def test_bernstein_mode(self, grid, expected):
        """Tests the first order Bernstein ratio of a pure mode
        """
        k = expected['pure_mode']['wavenumber']
        f = pure_mode(grid, [k])
        report = bernstein_ratio(f, 1, 2, 2, k / grid.period)
        assert report.value["upper"] == pytest.approx(expected['bernstein_first_order'], rel=1e-10)
        assert report.value["lower"] == pytest.approx(expected['bernstein_first_order'], rel=1e-10)

    def test_bernstein_order_zero(self, grid):
        """Tests that the zeroth order ratio with a = b is one
        """
        f = pure_mode(grid, [70])
        assert bernstein_ratio(f, 0, 2, 2, 70 / grid.period).value["upper"] == pytest.approx(1.0, rel=1e-12)

    def test_bernstein_leakage(self, grid):
        """Tests that a field outside the declared annulus is rejected
        """
        with pytest.raises(ValidationError):
            bernstein_ratio(pure_mode(grid, [70]), 1, 2, 2, 1.0)

    def test_bernstein_sweep(self):
        """Tests that the ratios do not depend on the block
        """
        report = bernstein_sweep(PeriodicGrid(1, 2048), range(0, 6), count=3)
        assert report.passed
        assert report.value["spread"] <= 1.2

    def test_embedding(self, grid, rng, expected):
        """Tests the l^r monotonicity and the single block smoothness trade
        """
        f = random_smooth_field(grid, rng)
        assert embedding_check(f, 1.0, 1.0, 1, 2).passed
        mode = pure_mode(grid, [expected['pure_mode']['wavenumber']])
        report = embedding_check(mode, 2.0, 1.0, 2, 2)
        assert report.value == pytest.approx(2.0**-3, rel=1e-10)
        assert report.passed is None
        with pytest.raises(PreconditionError):
            embedding_check(f, 1.0, 2.0, 1, 2)

    def test_linf_embedding(self, grid_2d, rng):
        """Tests that the sup norm is controlled by the critical Besov norm
        """
        for _ in range(5):
            assert linf_embedding_check(random_smooth_field(grid_2d, rng, mean=1.0)).value < 10

    def test_product_estimate(self, grid, rng):
        """Tests that one constant bounds the product estimate over a suite
        """
        ratios = [product_estimate_check(random_smooth_field(grid, rng), random_smooth_field(grid, rng), 1.5).value
                  for _ in range(10)]
        assert all(np.isfinite(ratio) and ratio > 0 for ratio in ratios)
        assert max(ratios) / min(ratios) < 10

    def test_derivative_equivalence(self, grid, expected):
        """Tests the derivative ratio of a pure mode in a single block
        """
        example = expected['pure_mode']
        f = pure_mode(grid, [example['wavenumber']])
        report = derivative_equivalence_check(f, 1, 0.5)
        assert report.value == pytest.approx(example['wavenumber'] / 2**example['block'], rel=1e-10)

    def test_composition(self, grid, rng):
        """Tests the composition estimate and its requirement F(0) = 0
        """
        f = random_smooth_field(grid, rng, amplitude=0.5)
        report = composition_estimate_check(f, np.sin, 1.5)
        assert np.isfinite(report.value) and report.value > 0
        with pytest.raises(PreconditionError):
            composition_estimate_check(f, np.cos, 1.5)

    def test_sobolev(self, grid):
        """Tests the B^s_{2,2} and H^s comparison and its stability under refinement
        """
        report = sobolev_suite(grid, 0.5, count=10)
        assert report.passed
        assert report.value["drift"] <= 0.1

    def test_lp_verify(self, grid):
        """Tests the full Littlewood-Paley suite on a small family
        """
        reports = lp_verify(grid, seed=1, count=4, s_list=(0.5, ), bernstein_count=3)
        ops = [report.op for report in reports]
        assert ops[:3] == ["partition_of_unity", "reconstruction", "almost_orthogonality"]
        assert "bernstein_sweep" in ops
        assert all(report.passed for report in reports)
