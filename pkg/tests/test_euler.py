"""Test the relaxed Euler solver and its functionals"""
import math
from dataclasses import replace
import numpy as np
import pytest
from modules.debug.errors import ConfigurationError, SolverError
from modules.physics.euler import (EulerState, InitialData, SolverConfig, a_priori_ratios, data_norm,
                                   energy_functionals, initialize, snapshot_times, solve, step, step_caps)
from modules.physics.symmetry import PressureLaw
from modules.spectral.grid import PeriodicGrid, ScalarField, VectorField


@pytest.fixture
def config(small_grid) -> SolverConfig:
    """Short ill-prepared run on 64 points

    Returns:
        SolverConfig: parameters of the run
    """
    return SolverConfig(small_grid, PressureLaw(2.0), tau=0.5, s_end=0.2, snapshot_times=(0.0, 0.1, 0.2),
                        data=InitialData("single-mode", 1e-3))


class TestConfig:

    def test_validation(self, small_grid):
        """Tests that every invalid parameter names its configuration key
        """
        cases = [({"tau": 0.0}, "solver.tau"), ({"tau": 1.5}, "solver.tau"), ({"s_end": -1.0}, "solver.s_end"),
                 ({"cfl": 1.0}, "solver.cfl"), ({"rho_bar": 0.0}, "law.rho_bar"), ({"dealias": False}, "solver.dealias"),
                 ({"max_step": 0.0}, "solver.max_step"), ({"snapshot_times": (-0.1, )}, "solver.snapshot_times")]
        for params, key in cases:
            with pytest.raises(ConfigurationError) as info:
                SolverConfig(small_grid, **params)
            assert info.value.field == key

    def test_snapshot_times(self, small_grid):
        """Tests that the snapshot times are sorted and end at the final time
        """
        config = SolverConfig(small_grid, s_end=1.0, snapshot_times=(0.5, 0.0, 0.5))
        assert config.snapshot_times == (0.0, 0.5, 1.0)
        assert snapshot_times(1.0, 4) == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_initial_data(self):
        """Tests the descriptor of the initial data
        """
        with pytest.raises(ConfigurationError) as info:
            InitialData("gaussian")
        assert info.value.field == "data.kind"
        with pytest.raises(ConfigurationError):
            InitialData(velocity="random")
        assert InitialData(velocity="well-prepared").label == "well-prepared"
        assert InitialData(velocity="gradient").label == "ill-prepared"


class TestInitialize:

    def test_single_mode(self, config):
        """Tests the single mode density and the zero velocity
        """
        state = initialize(config)
        x = config.grid.coordinates()[0]
        assert np.allclose(state.rho.values, 1 + 1e-3 * np.sin(x), atol=1e-14)
        assert state.u.norm(np.inf) == 0
        assert state.mass == pytest.approx(2 * np.pi, rel=1e-13)

    def test_well_prepared(self, config):
        """Tests that well-prepared data start on Darcy's law
        """
        state = initialize(replace(config, data=InitialData(velocity="well-prepared")))
        pressure = ScalarField(config.grid, config.law.pressure(state.rho.values))
        assert np.allclose(state.u.values[0], -pressure.derivative([1]).values, atol=1e-13)

    def test_multi_mode(self, grid_2d):
        """Tests that multi-mode data are reproducible and keep the mean density
        """
        config = SolverConfig(grid_2d, data=InitialData("multi-mode", 0.1, 3, seed=7))
        first, second = initialize(config), initialize(config)
        assert np.array_equal(first.rho.values, second.rho.values)
        assert first.rho.mean == pytest.approx(1.0, abs=1e-12)

    def test_vacuum(self, config):
        """Tests that an amplitude reaching vacuum is a configuration error
        """
        with pytest.raises(ConfigurationError) as info:
            initialize(replace(config, data=InitialData("single-mode", 1.5)))
        assert info.value.field == "data.amplitude"

    def test_data_norm(self, config):
        """Tests that equilibrium data have zero norm
        """
        equilibrium = replace(config, data=InitialData("equilibrium"))
        assert data_norm(initialize(equilibrium), equilibrium, 1.5, 1) == pytest.approx(0, abs=1e-12)
        assert data_norm(initialize(config), config, 1.5, 1) > 0


class TestSolver:

    def test_equilibrium(self, config):
        """Tests that the constant state is a steady solution
        """
        run = solve(replace(config, data=InitialData("equilibrium")))
        assert np.allclose(run.final.rho.values, 1.0, atol=1e-13)
        assert run.final.u.norm(np.inf) < 1e-12

    def test_pure_relaxation(self, config):
        """Tests the closed form of the relaxation flow with the transport switched off
        """
        frozen = replace(config, transport=False)
        run = solve(frozen)
        rho0 = initialize(frozen).rho
        pressure = ScalarField(frozen.grid, frozen.law.pressure(rho0.values))
        grad_p = pressure.derivative([1]).values
        for s, u in zip(run.momentum.times, run.momentum.snapshots):
            exact = -grad_p * (1 - math.exp(-s / frozen.tau**2))
            assert np.allclose(u.values[0], exact, atol=1e-12)
        assert np.array_equal(run.final.rho.values, rho0.values)

    def test_snapshots(self, config):
        """Tests that the run lands exactly on the snapshot times
        """
        run = solve(config)
        assert list(run.trajectory.times) == [0.0, 0.1, 0.2]
        assert len(run.entropy) == 3
        assert run.entropy.snapshots[0].components == 2
        assert run.diagnostics[0].s == 0
        assert run.diagnostics[-1].s == 0.2

    def test_mass(self, config):
        """Tests that the mass is conserved to roundoff
        """
        run = solve(config)
        masses = [record.mass for record in run.diagnostics]
        assert max(abs(mass - masses[0]) for mass in masses) < 1e-12 * masses[0]

    def test_entropy_decay(self, config):
        """Tests that the relative entropy does not increase and balances the dissipation
        """
        records = []
        run = solve(config, on_step=records.append)
        entropy = [record.rel_entropy for record in run.diagnostics]
        assert all(b <= a + 1e-10 for a, b in zip(entropy, entropy[1:]))
        assert len(records) == run.steps
        assert run.balance_error < 1e-2

    def test_entropy_balance(self, config):
        """Tests the entropy balance on 256 points and its improvement from 128 points
        """
        coarse = solve(replace(config, grid=PeriodicGrid(1, 128)))
        fine = solve(replace(config, grid=PeriodicGrid(1, 256)))
        assert fine.balance_error < 1e-3
        assert fine.balance_error < coarse.balance_error

    def test_strang_order(self):
        """Tests that halving the step divides the self-convergence error by four
        """
        grid = PeriodicGrid(1, 32)
        base = SolverConfig(grid, PressureLaw(2.0), tau=0.5, s_end=0.2, snapshot_times=(0.0, 0.2),
                            data=InitialData("single-mode", 0.05, velocity="gradient"))
        finals = [solve(replace(base, max_step=ds)).final for ds in (0.02, 0.01, 0.005)]
        errors = [
            max(np.max(np.abs(a.rho.values - b.rho.values)), np.max(np.abs(a.u.values - b.u.values)))
            for a, b in zip(finals, finals[1:])
        ]
        assert math.log2(errors[0] / errors[1]) > 1.9

    def test_undamped(self, config):
        """Tests that without damping the relative entropy is nearly conserved
        """
        run = solve(replace(config, damping=False, s_end=0.1, snapshot_times=(0.0, 0.1)))
        first, last = run.diagnostics[0].rel_entropy, run.diagnostics[-1].rel_entropy
        assert abs(last - first) < 1e-2 * first

    def test_caps(self, config):
        """Tests the step limits of the scheme
        """
        state = initialize(config)
        caps = step_caps(config, state.rho.values, state.u.values)
        assert caps["transport"] == math.inf
        assert caps["limit"] == caps["acoustic"]
        relaxed = step_caps(replace(config, relaxed_cap=True), state.rho.values, state.u.values)
        assert relaxed["limit"] == max(relaxed["acoustic"], relaxed["relaxed"])
        undamped = step_caps(replace(config, damping=False, relaxed_cap=True), state.rho.values, state.u.values)
        assert undamped["limit"] == undamped["acoustic"]

    def test_acoustic_cap(self):
        """Tests that a small tau keeps the step under the acoustic cap even where the relaxed cap is larger
        """
        small = SolverConfig(PeriodicGrid(1, 32), PressureLaw(2.0), tau=1e-3, s_end=2e-3, snapshot_times=(0.0, 2e-3))
        state = initialize(small)
        caps = step_caps(small, state.rho.values, state.u.values)
        assert caps["relaxed"] > caps["acoustic"]
        assert caps["limit"] == caps["acoustic"]
        run = solve(small)
        assert run.steps >= small.s_end / (1.01 * caps["acoustic"])

    def test_step(self, config):
        """Tests that a single step advances the time and keeps the grid
        """
        state = step(initialize(config), 1e-3, config)
        assert state.s == 1e-3
        assert state.rho.grid == config.grid

    def test_vacuum_failure(self, config):
        """Tests that a breach of the vacuum guard stops the run with the partial result attached
        """
        x = config.grid.coordinates()[0]
        rho = ScalarField(config.grid, 1 + 1.5 * np.sin(x))
        state = EulerState(rho, VectorField.zeros(config.grid), 0.0)
        with pytest.raises(SolverError) as info:
            solve(config, state)
        partial = info.value.partial
        assert partial is not None
        assert len(partial.trajectory) == 1
        assert partial.diagnostics[0].s == 0


class TestFunctionals:

    def test_equilibrium(self, config):
        """Tests that the functionals vanish at equilibrium and the ratios are flagged degenerate
        """
        run = solve(replace(config, data=InitialData("equilibrium")))
        functionals = energy_functionals(run.entropy, 1.5, 1, config.tau)
        assert functionals.energy == pytest.approx(0, abs=1e-12)
        assert functionals.dissipation == pytest.approx(0, abs=1e-10)
        report = a_priori_ratios(run, 1.5, 1)
        assert report.value["E0"] < 1e-12

    def test_ratios(self, config):
        """Tests that the a priori ratios are finite for a small perturbation
        """
        run = solve(config)
        report = a_priori_ratios(run, 1.5, 1)
        assert not report.params["degenerate"]
        for key in ("energy_part", "gradient_part", "nonlinear", "closed"):
            assert np.isfinite(report.value[key])
        assert report.value["E"] >= report.value["E0"] * (1 - 1e-12)

    def test_amplitude_scaling(self, config):
        """Tests that doubling a small amplitude doubles the energy functional
        """
        energies = []
        for amplitude in (1e-4, 2e-4):
            run = solve(replace(config, data=InitialData("single-mode", amplitude)))
            energies.append(energy_functionals(run.entropy, 1.5, 1, config.tau).energy)
        assert energies[1] / energies[0] == pytest.approx(2.0, rel=1e-2)
