"""Pseudo-spectral solver of the relaxed isentropic Euler system in slow time.

With s = tau t and u = rho v / tau the system reads
    rho_s + div u = 0,
    u_s + div(u (x) u / rho) = -(u + grad p(rho)) / tau^2.
One step is a Strang splitting: an exact half step of the relaxation-pressure flow with rho frozen,
a classical RK4 step of the transport flow, and a second relaxation half step. The state lives on the
2/3-rule band; every product is filtered back onto it.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
from modules.data.report import Report
from modules.debug.errors import ConfigurationError, DomainError, SolverError
from modules.physics.symmetry import PressureLaw, VACUUM_GUARD, check_density
from modules.spectral.dyadic import besov_norm, chemin_lerner_norm
from modules.spectral.grid import PeriodicGrid, ScalarField, Trajectory, VectorField

logger = logging.getLogger(__name__)

DATA_KINDS = ("equilibrium", "single-mode", "multi-mode")
VELOCITY_KINDS = ("zero", "gradient", "well-prepared")


@dataclass(frozen=True)
class InitialData:
    """Descriptor of the initial data

    Args:
        kind (:class:`str`): equilibrium, single-mode or multi-mode density
        amplitude (:class:`float`): relative size a of the density perturbation
        modes (:class:`int`): number of modes of the multi-mode density
        velocity (:class:`str`): zero (ill-prepared), gradient (v0 = a grad chi) or well-prepared (u0 = -grad p(rho0))
        seed (:class:`int`): seed of the random coefficients
    """
    kind: str = "single-mode"
    amplitude: float = 1e-3
    modes: int = 4
    velocity: str = "zero"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ConfigurationError(f"unknown initial data '{self.kind}', expected one of {DATA_KINDS}", "data.kind")
        if self.velocity not in VELOCITY_KINDS:
            raise ConfigurationError(f"unknown velocity '{self.velocity}', expected one of {VELOCITY_KINDS}",
                                     "data.velocity")
        if self.modes < 1:
            raise ConfigurationError("must be at least 1", "data.modes")

    @property
    def label(self) -> str:
        """:class:`str`: well-prepared or ill-prepared"""
        return "well-prepared" if self.velocity == "well-prepared" else "ill-prepared"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a run

    Args:
        grid (:class:`PeriodicGrid`): grid
        law (:class:`PressureLaw`): pressure law
        tau (:class:`float`): relaxation time in (0, 1]
        rho_bar (:class:`float`): background density
        s_end (:class:`float`): final slow time
        cfl (:class:`float`): safety factor in (0, 1)
        snapshot_times (:class:`tuple`): slow times of the snapshots, within [0, s_end]
        data (:class:`InitialData`): initial data
        max_step (:class:`float`): optional upper bound on the step
        dealias (:class:`bool`): 2/3-rule filtering, always on
        transport (:class:`bool`): whether to run the transport sub-step
        damping (:class:`bool`): whether the relaxation term -u / tau^2 is present
        relaxed_cap (:class:`bool`): with damping, let the linear cap grow to the larger of the acoustic and relaxed caps
    """
    grid: PeriodicGrid
    law: PressureLaw = field(default_factory=PressureLaw)
    tau: float = 1.0
    rho_bar: float = 1.0
    s_end: float = 1.0
    cfl: float = 0.4
    snapshot_times: Tuple[float, ...] = (0.0, 1.0)
    data: InitialData = field(default_factory=InitialData)
    max_step: Optional[float] = None
    dealias: bool = True
    transport: bool = True
    damping: bool = True
    relaxed_cap: bool = False

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ConfigurationError(f"must lie in (0, 1], got {self.tau}", "solver.tau")
        if not self.s_end > 0:
            raise ConfigurationError(f"must be positive, got {self.s_end}", "solver.s_end")
        if not 0 < self.cfl < 1:
            raise ConfigurationError(f"must lie in (0, 1), got {self.cfl}", "solver.cfl")
        if not self.rho_bar > 0:
            raise ConfigurationError(f"must be positive, got {self.rho_bar}", "law.rho_bar")
        if not self.dealias:
            raise ConfigurationError("the 2/3 rule cannot be switched off", "solver.dealias")
        if self.max_step is not None and not self.max_step > 0:
            raise ConfigurationError(f"must be positive, got {self.max_step}", "solver.max_step")
        times = tuple(sorted(set(float(t) for t in self.snapshot_times) | {float(self.s_end)}))
        if times[0] < 0 or times[-1] > self.s_end:
            raise ConfigurationError("snapshot times must lie in [0, s_end]", "solver.snapshot_times")
        object.__setattr__(self, "snapshot_times", times)

    @classmethod
    def from_config(cls, config: dict, tau: Optional[float] = None):
        """Builds the solver parameters from a configuration dictionary

        Args:
            config (dict): merged configuration
            tau (float, optional): overrides solver.tau. Defaults to None.

        Returns:
            SolverConfig: parameters of the run
        """
        grid = PeriodicGrid(config['grid']['dim'], config['grid']['points'], config['grid']['period'])
        solver = config['solver']
        data = config.get('data', {})
        return cls(grid=grid,
                   law=PressureLaw(config['law']['gamma']),
                   tau=solver['tau'] if tau is None else tau,
                   rho_bar=config['law']['rho_bar'],
                   s_end=solver['s_end'],
                   cfl=solver['cfl'],
                   snapshot_times=tuple(solver['snapshot_times']),
                   data=InitialData(data.get('kind', 'single-mode'), data.get('amplitude', 1e-3), data.get('modes', 4),
                                    data.get('velocity', 'zero'), config.get('seed', 0)),
                   max_step=solver.get('max_step'),
                   relaxed_cap=solver.get('relaxed_cap', False))


@dataclass
class EulerState:
    """Density and scaled momentum u = rho v / tau at slow time s

    Args:
        rho (:class:`ScalarField`): density
        u (:class:`VectorField`): scaled momentum
        s (:class:`float`): slow time
    """
    rho: ScalarField
    u: VectorField
    s: float = 0.0

    @property
    def mass(self) -> float:
        """:class:`float`: integral of the density"""
        return self.rho.grid.integrate(self.rho.values)


@dataclass
class DiagnosticsRecord:
    """Diagnostics after a step, integrals taken in slow time

    Args:
        s (:class:`float`): slow time
        mass (:class:`float`): integral of rho
        rel_entropy (:class:`float`): integral of the relative entropy
        dissipation (:class:`float`): accumulated integral of |u|^2 / rho
        balance_residual (:class:`float`): rel_entropy(s) - rel_entropy(0) + dissipation
        sup_w (:class:`float`): ||W - W-bar||_inf
        sup_grad_w (:class:`float`): ||grad W||_inf
        blowup_integral (:class:`float`): accumulated integral of ||grad W||_inf
    """
    s: float
    mass: float
    rel_entropy: float
    dissipation: float
    balance_residual: float
    sup_w: float
    sup_grad_w: float
    blowup_integral: float

    FIELDS = ("s", "mass", "rel_entropy", "dissipation", "balance_residual", "sup_W", "sup_gradW", "blowup_integral")

    def row(self) -> list:
        """Values in the order of :attr:`FIELDS`"""
        return [self.s, self.mass, self.rel_entropy, self.dissipation, self.balance_residual, self.sup_w,
                self.sup_grad_w, self.blowup_integral]


def _unit_profile(config: SolverConfig) -> np.ndarray:
    grid = config.grid
    coords = grid.coordinates()
    data = config.data
    if data.kind != "multi-mode":
        return np.sin(2 * np.pi * coords[0] / grid.period)
    rng = np.random.default_rng(data.seed)
    weights = rng.uniform(0.5, 1.0, size=data.modes)
    weights = weights / weights.sum()
    phases = rng.uniform(0, 2 * np.pi, size=data.modes)
    profile = np.zeros(grid.shape)
    for k in range(1, data.modes + 1):
        wavevector = [k] + [int(rng.integers(0, k + 1)) for _ in range(grid.dim - 1)]
        argument = sum(2 * np.pi * kj * x / grid.period for kj, x in zip(wavevector, coords))
        profile = profile + weights[k - 1] * np.sin(argument + phases[k - 1])
    return profile


def _filtered(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    return grid.inverse(grid.forward(values) * grid.dealias_mask)


def _gradient(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    spectrum = grid.forward(values) * grid.dealias_mask
    return np.stack([grid.inverse(spectrum * symbol) for symbol in grid.derivative_symbols])


def _pressure_gradient(config: SolverConfig, rho: np.ndarray) -> np.ndarray:
    return _gradient(config.grid, config.law.pressure(rho))


def initialize(config: SolverConfig) -> EulerState:
    """Initial state of the run: rho0 and u0 = rho0 v0 / tau

    Raises:
        ConfigurationError: nonpositive initial density

    Returns:
        EulerState: state at s = 0, on the 2/3-rule band
    """
    grid = config.grid
    data = config.data
    amplitude = 0.0 if data.kind == "equilibrium" else data.amplitude
    profile = _unit_profile(config)
    if data.kind == "single-mode":
        rho = config.rho_bar + amplitude * profile
    else:
        rho = config.rho_bar * (1 + amplitude * profile)
    rho = _filtered(grid, rho)
    if not np.min(rho) > VACUUM_GUARD:
        raise ConfigurationError(f"the initial density reaches {np.min(rho):.3g}", "data.amplitude")
    if data.velocity == "zero":
        u = np.zeros((grid.dim, ) + grid.shape)
    elif data.velocity == "gradient":
        velocity = data.amplitude * _gradient(grid, profile)
        u = np.stack([_filtered(grid, rho * component / config.tau) for component in velocity])
    else:
        u = -_pressure_gradient(config, rho)
    return EulerState(ScalarField(grid, rho), VectorField(grid, u), 0.0)


def data_norm(state: EulerState, config: SolverConfig, sigma: float, r: float) -> float:
    """||(rho0 - rho_bar, m0)||_{B^sigma_{2,r}} with m0 = tau u0"""
    grid = config.grid
    stacked = np.concatenate([(state.rho.values - config.rho_bar)[None], config.tau * state.u.values])
    return besov_norm(VectorField(grid, stacked), sigma, 2, r).value


def _relax(config: SolverConfig, rho: np.ndarray, u: np.ndarray, ds: float) -> np.ndarray:
    grad_p = _pressure_gradient(config, rho)
    if not config.damping:
        return u - ds / config.tau**2 * grad_p
    return -grad_p + (u + grad_p) * math.exp(-ds / config.tau**2)


def _transport_rhs(config: SolverConfig, rho: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    grid = config.grid
    mask = grid.dealias_mask
    symbols = grid.derivative_symbols
    u_hat = [grid.forward(component) for component in u]
    rho_rhs = -grid.inverse(sum(symbol * spectrum for symbol, spectrum in zip(symbols, u_hat)))
    u_rhs = []
    for l in range(grid.dim):
        total = 0
        for j in range(grid.dim):
            total = total + symbols[j] * grid.forward(u[j] * u[l] / rho) * mask
        u_rhs.append(-grid.inverse(total))
    return rho_rhs, np.stack(u_rhs)


def _rk4(config: SolverConfig, rho: np.ndarray, u: np.ndarray, ds: float) -> Tuple[np.ndarray, np.ndarray]:
    k1 = _transport_rhs(config, rho, u)
    k2 = _transport_rhs(config, rho + 0.5 * ds * k1[0], u + 0.5 * ds * k1[1])
    k3 = _transport_rhs(config, rho + 0.5 * ds * k2[0], u + 0.5 * ds * k2[1])
    k4 = _transport_rhs(config, rho + ds * k3[0], u + ds * k3[1])
    rho = rho + ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    u = u + ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return rho, u


def _advance(config: SolverConfig, rho: np.ndarray, u: np.ndarray, ds: float, s: float):
    u = _relax(config, rho, u, 0.5 * ds)
    if config.transport:
        rho, u = _rk4(config, rho, u, ds)
    u = _relax(config, rho, u, 0.5 * ds)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
        raise SolverError("non finite value in the state", s + ds)
    try:
        check_density(rho)
    except DomainError as exc:
        raise SolverError(str(exc), s + ds) from exc
    return rho, u


def step(state: EulerState, ds: float, config: SolverConfig) -> EulerState:
    """One Strang step: relaxation half step, RK4 transport step, relaxation half step

    Args:
        state (EulerState): current state
        ds (float): slow-time step
        config (SolverConfig): parameters of the run

    Raises:
        SolverError: vacuum or non finite values after the step

    Returns:
        EulerState: state at s + ds
    """
    rho, u = _advance(config, state.rho.values, state.u.values, ds, state.s)
    return EulerState(ScalarField(config.grid, rho), VectorField(config.grid, u), state.s + ds)


def step_caps(config: SolverConfig, rho: np.ndarray, u: np.ndarray) -> Dict[str, float]:
    """Step limits of the scheme.
    transport: CFL dx / max|u / rho|; acoustic: CFL tau dx / sqrt(max p'); relaxed: CFL 2 / (max p' k_max^2).
    The linear limit is the acoustic cap; with damping and relaxed_cap it is the larger of acoustic and relaxed

    Returns:
        Dict[str, float]: the caps and the resulting step limit
    """
    grid = config.grid
    speed = float(np.max(np.sqrt(np.sum(u**2, axis=0)) / rho))
    max_dp = float(np.max(config.law.dp(rho)))
    transport = config.cfl * grid.spacing / speed if speed > 0 and config.transport else math.inf
    acoustic = config.cfl * config.tau * grid.spacing / math.sqrt(max_dp)
    relaxed = config.cfl * 2 / (max_dp * grid.k_max_dealiased**2)
    linear = max(acoustic, relaxed) if config.damping and config.relaxed_cap else acoustic
    limit = min(transport, linear, config.max_step or math.inf)
    return {"transport": transport, "acoustic": acoustic, "relaxed": relaxed, "limit": limit}


class _Monitor():
    """Accumulates the diagnostics along a run"""

    def __init__(self, config: SolverConfig):
        self.config = config
        self.law = config.law
        self.slope = float(self.law.h_prime(config.rho_bar))
        self.offset = float(self.law.h(config.rho_bar))
        self.records: List[DiagnosticsRecord] = []
        self.initial_entropy = None
        self.last = None

    def relative_entropy(self, rho: np.ndarray, u: np.ndarray) -> float:
        """Integral of tau^2 |u|^2 / (2 rho) + h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar)"""
        tau = self.config.tau
        density = tau**2 * np.sum(u**2, axis=0) / (2 * rho) + self.law.h(rho) - self.offset \
            - self.slope * (rho - self.config.rho_bar)
        return self.config.grid.integrate(density)

    def entropy_variables(self, rho: np.ndarray, u: np.ndarray) -> np.ndarray:
        """W = (h'(rho) - |W2|^2 / 2, W2) with W2 = tau u / rho, stacked"""
        w2 = self.config.tau * u / rho
        w1 = self.law.h_prime(rho) - 0.5 * np.sum(w2**2, axis=0)
        return np.concatenate([w1[None], w2])

    def record(self, s: float, rho: np.ndarray, u: np.ndarray) -> DiagnosticsRecord:
        """Appends the diagnostics of the state at time s"""
        grid = self.config.grid
        entropy = self.relative_entropy(rho, u)
        rate = grid.integrate(np.sum(u**2, axis=0) / rho)
        w = self.entropy_variables(rho, u)
        perturbation = w.copy()
        perturbation[0] -= self.slope
        sup_w = float(np.max(np.sqrt(np.sum(perturbation**2, axis=0))))
        gradient = np.concatenate([_gradient(grid, component) for component in w])
        sup_grad = float(np.max(np.sqrt(np.sum(gradient**2, axis=0))))
        if self.last is None:
            self.initial_entropy = entropy
            dissipation, blowup = 0.0, 0.0
        else:
            last_s, last_rate, last_grad, last_record = self.last
            dissipation = last_record.dissipation + 0.5 * (s - last_s) * (rate + last_rate)
            blowup = last_record.blowup_integral + 0.5 * (s - last_s) * (sup_grad + last_grad)
        record = DiagnosticsRecord(s, grid.integrate(rho), entropy, dissipation,
                                   entropy - self.initial_entropy + dissipation, sup_w, sup_grad, blowup)
        self.last = (s, rate, sup_grad, record)
        self.records.append(record)
        return record


@dataclass
class EulerRun:
    """Outcome of a run

    Args:
        config (:class:`SolverConfig`): parameters
        trajectory (:class:`Trajectory`): density snapshots
        momentum (:class:`Trajectory`): scaled momentum snapshots
        entropy (:class:`Trajectory`): W snapshots, N + 1 components
        diagnostics (:class:`list`): one :class:`DiagnosticsRecord` per step, the first at s = 0
        caps (:class:`dict`): smallest step caps met during the run
        steps (:class:`int`): number of steps
    """
    config: SolverConfig
    trajectory: Optional[Trajectory]
    momentum: Optional[Trajectory]
    entropy: Optional[Trajectory]
    diagnostics: List[DiagnosticsRecord]
    caps: Dict[str, float]
    steps: int

    @property
    def final(self) -> EulerState:
        """:class:`EulerState`: last snapshot"""
        return EulerState(self.trajectory.snapshots[-1], self.momentum.snapshots[-1], float(self.trajectory.times[-1]))

    @property
    def balance_error(self) -> float:
        """:class:`float`: largest |balance residual| relative to max(initial relative entropy, dissipation)"""
        first, last = self.diagnostics[0], self.diagnostics[-1]
        scale = max(first.rel_entropy, last.dissipation)
        worst = max(abs(record.balance_residual) for record in self.diagnostics)
        return worst / scale if scale > 0 else worst


def _build_run(config, times, rho_snaps, u_snaps, monitor, caps, steps) -> EulerRun:
    grid = config.grid
    metadata = {"tau": config.tau, "gamma": config.law.gamma, "rho_bar": config.rho_bar, "time": "slow"}
    if not times:
        return EulerRun(config, None, None, None, monitor.records, caps, steps)
    trajectory = Trajectory(times, [ScalarField(grid, rho) for rho in rho_snaps], metadata)
    momentum = Trajectory(times, [VectorField(grid, u) for u in u_snaps], metadata)
    entropy = Trajectory(times, [VectorField(grid, monitor.entropy_variables(rho, u))
                                 for rho, u in zip(rho_snaps, u_snaps)], metadata)
    return EulerRun(config, trajectory, momentum, entropy, monitor.records, caps, steps)


def solve(config: SolverConfig, state: Optional[EulerState] = None,
          on_step: Optional[Callable[[DiagnosticsRecord], None]] = None) -> EulerRun:
    """Integrates the system up to s_end, landing exactly on every snapshot time

    Args:
        config (SolverConfig): parameters of the run
        state (EulerState, optional): initial state. Defaults to :func:`initialize` of the config.
        on_step (Callable[[DiagnosticsRecord], None], optional): called after every step

    Raises:
        SolverError: a step failed; its partial attribute holds the run up to the failure

    Returns:
        EulerRun: snapshots, diagnostics and caps
    """
    state = initialize(config) if state is None else state
    rho, u, s = state.rho.values, state.u.values, state.s
    monitor = _Monitor(config)
    monitor.record(s, rho, u)
    caps = step_caps(config, rho, u)
    times, rho_snaps, u_snaps = [], [], []
    steps = 0
    logger.info("euler run tau=%s M=%d: initial caps transport %.3g acoustic %.3g relaxed %.3g", config.tau,
                config.grid.points, caps["transport"], caps["acoustic"], caps["relaxed"])
    for target in config.snapshot_times:
        while target - s > 1e-14 * max(1.0, target):
            current = step_caps(config, rho, u)
            caps = {key: min(caps[key], value) for key, value in current.items()}
            remaining = target - s
            ds = remaining / math.ceil(remaining / current["limit"] - 1e-9)
            try:
                rho, u = _advance(config, rho, u, ds, s)
            except SolverError as exc:
                exc.partial = _build_run(config, times, rho_snaps, u_snaps, monitor, caps, steps)
                logger.error("euler run tau=%s failed at s=%.6g: %s", config.tau, exc.s, exc)
                raise
            s = target if remaining - ds <= 1e-14 * max(1.0, target) else s + ds
            steps += 1
            record = monitor.record(s, rho, u)
            if on_step is not None:
                on_step(record)
            logger.debug("s=%.6g ds=%.3g rel_entropy=%.6g", s, ds, record.rel_entropy)
        times.append(s)
        rho_snaps.append(rho)
        u_snaps.append(u)
    run = _build_run(config, times, rho_snaps, u_snaps, monitor, caps, steps)
    logger.info("euler run tau=%s done in %d steps, balance error %.3g", config.tau, steps, run.balance_error)
    return run


@dataclass
class Functionals:
    """Energy, dissipation and sup functionals of a run

    Args:
        energy (:class:`float`): E = ||W - W-bar|| in tilde L^inf(B^sigma_{2,r})
        dissipation (:class:`float`): D = tau^-1/2 ||W2|| in tilde L^2(B^sigma_{2,r}) + tau^1/2 ||grad W|| in tilde L^2(B^{sigma-1}_{2,r})
        sup (:class:`float`): S = sup_t ||W||_inf + sup_t ||grad W||_inf
        damping_part (:class:`float`): first term of D
        gradient_part (:class:`float`): second term of D
    """
    energy: float
    dissipation: float
    sup: float
    damping_part: float = 0.0
    gradient_part: float = 0.0


def _gradient_field(w: VectorField) -> VectorField:
    return VectorField(w.grid, np.concatenate([part.gradient().values for part in w]))


def energy_functionals(traj: Trajectory, sigma: float, r: float, tau: float, fast_time: bool = False) -> Functionals:
    """E, D_tau and S of a trajectory of entropy variables (N + 1 components)

    Args:
        traj (Trajectory): W snapshots, metadata holding gamma and rho_bar
        sigma (float): smoothness
        r (float): summation exponent
        tau (float): relaxation time
        fast_time (bool, optional): take time norms in t = s / tau instead of the slow time. Defaults to False.

    Returns:
        Functionals: the three functionals
    """
    law = PressureLaw(traj.metadata.get("gamma", 2.0))
    reference = np.zeros(traj.snapshots[0].components)
    reference[0] = float(law.h_prime(traj.metadata.get("rho_bar", 1.0)))
    shape = (-1, ) + (1, ) * traj.grid.dim
    traj = traj.rescaled(1 / tau) if fast_time else traj
    perturbation = traj.map(lambda w: VectorField(w.grid, w.values - reference.reshape(shape)))
    energy = chemin_lerner_norm(perturbation, np.inf, sigma, 2, r, homogeneous=False).value
    gradients = traj.map(_gradient_field)
    if len(traj) > 1:
        w2 = traj.map(lambda w: VectorField(w.grid, w.values[1:]))
        damping = chemin_lerner_norm(w2, 2, sigma, 2, r, homogeneous=False).value / math.sqrt(tau)
        grad_part = math.sqrt(tau) * chemin_lerner_norm(gradients, 2, sigma - 1, 2, r, homogeneous=False).value
    else:
        damping, grad_part = 0.0, 0.0
    sup = max(w.norm(np.inf) for w in traj.snapshots) + max(g.norm(np.inf) for g in gradients.snapshots)
    return Functionals(energy, damping + grad_part, sup, damping, grad_part)


def a_priori_ratios(run: EulerRun, sigma: float, r: float) -> Report:
    """Ratios of the endpoint inequalities of the a priori estimate, evaluated in fast time:
    energy part (E + tau^-1/2 ||W2||) / (E(0) + E^1/2 D), gradient part tau^1/2 ||grad W|| / (E(0) + E^1/2 D + E D),
    nonlinear (E + D) / (E(0) + E^1/2 D + E D) and closed (E + D) / E(0)

    Returns:
        Report: the four ratios and the functionals, flagged degenerate when E(0) = 0
    """
    tau = run.config.tau
    functionals = energy_functionals(run.entropy, sigma, r, tau, fast_time=True)
    initial = Trajectory(run.entropy.times[:1], run.entropy.snapshots[:1], run.entropy.metadata)
    e0 = energy_functionals(initial, sigma, r, tau).energy
    e, d = functionals.energy, functionals.dissipation
    mixed = e0 + math.sqrt(e) * d
    full = mixed + e * d

    def ratio(numerator, denominator):
        return numerator / denominator if denominator > 0 else 0.0

    value = {
        "E": e,
        "D": d,
        "S": functionals.sup,
        "E0": e0,
        "energy_part": ratio(e + functionals.damping_part, mixed),
        "gradient_part": ratio(functionals.gradient_part, full),
        "nonlinear": ratio(e + d, full),
        "closed": ratio(e + d, e0),
    }
    return Report("a_priori_ratios", {"sigma": sigma, "r": r, "tau": tau, "degenerate": e0 == 0}, value)


def snapshot_times(s_end: float, count: int) -> Sequence[float]:
    """count + 1 equally spaced slow times on [0, s_end]"""
    return tuple(float(t) for t in np.linspace(0.0, s_end, count + 1))

