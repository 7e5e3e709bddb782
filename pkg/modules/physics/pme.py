"""Pseudo-spectral solver of the porous medium equation N_s = lap p(N) near a constant state.

The linear part p'(rho_bar) lap N is propagated exactly mode by mode, the remainder
lap(p(N) - p'(rho_bar) N) explicitly by a second order exponential time differencing step.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import numpy as np
from scipy import special
from modules.data.report import Report
from modules.debug.errors import ConfigurationError, DomainError, SolverError
from modules.physics.symmetry import PressureLaw, check_density
from modules.spectral.dyadic import besov_norm
from modules.spectral.grid import PeriodicGrid, ScalarField, Trajectory

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-3
SAFETY = 0.9


@dataclass(frozen=True)
class PMEConfig:
    """Parameters of a PME run

    Args:
        grid (:class:`PeriodicGrid`): grid
        law (:class:`PressureLaw`): pressure law
        rho_bar (:class:`float`): linearisation state
        s_end (:class:`float`): final time
        snapshot_times (:class:`tuple`): snapshot times within [0, s_end]
        tolerance (:class:`float`): local error tolerance of the adaptive stepper
        max_step (:class:`float`): largest step, the fixed step when adaptive is off
        adaptive (:class:`bool`): whether to control the step with the embedded first order estimate
    """
    grid: PeriodicGrid
    law: PressureLaw = field(default_factory=PressureLaw)
    rho_bar: float = 1.0
    s_end: float = 1.0
    snapshot_times: Tuple[float, ...] = (0.0, 1.0)
    tolerance: float = 1e-9
    max_step: float = 1e-2
    adaptive: bool = True

    def __post_init__(self):
        if not self.s_end > 0:
            raise ConfigurationError(f"must be positive, got {self.s_end}", "pme.s_end")
        if not self.max_step > 0:
            raise ConfigurationError(f"must be positive, got {self.max_step}", "pme.max_step")
        if not self.tolerance > 0:
            raise ConfigurationError(f"must be positive, got {self.tolerance}", "pme.tolerance")
        if not self.rho_bar > 0:
            raise ConfigurationError(f"must be positive, got {self.rho_bar}", "law.rho_bar")
        times = tuple(sorted(set(float(t) for t in self.snapshot_times) | {float(self.s_end)}))
        if times[0] < 0 or times[-1] > self.s_end:
            raise ConfigurationError("snapshot times must lie in [0, s_end]", "pme.snapshot_times")
        object.__setattr__(self, "snapshot_times", times)

    @classmethod
    def from_config(cls, config: dict, s_end: Optional[float] = None, snapshot_times: Optional[Tuple] = None):
        """Builds the PME parameters from a configuration dictionary, optionally on the times of an Euler run"""
        grid = PeriodicGrid(config['grid']['dim'], config['grid']['points'], config['grid']['period'])
        pme = config['pme']
        return cls(grid=grid,
                   law=PressureLaw(config['law']['gamma']),
                   rho_bar=config['law']['rho_bar'],
                   s_end=pme['s_end'] if s_end is None else s_end,
                   snapshot_times=tuple(pme['snapshot_times'] if snapshot_times is None else snapshot_times),
                   tolerance=pme['tolerance'],
                   max_step=pme['max_step'],
                   adaptive=pme['adaptive'])

    @property
    def linear_symbol(self) -> np.ndarray:
        """:class:`numpy.ndarray`: -p'(rho_bar) |2 pi xi|^2"""
        return -float(self.law.dp(self.rho_bar)) * (2 * np.pi * self.grid.xi_norm)**2


@dataclass
class PMERecord:
    """Diagnostics after a step

    Args:
        s (:class:`float`): time
        mass (:class:`float`): integral of N
        deviation (:class:`float`): integral of (N - rho_bar)^2
        step (:class:`float`): size of the step that reached s
    """
    s: float
    mass: float
    deviation: float
    step: float

    FIELDS = ("s", "mass", "deviation", "step")

    def row(self) -> list:
        """Values in the order of :attr:`FIELDS`"""
        return [self.s, self.mass, self.deviation, self.step]


def phi_functions(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """phi1(z) = (e^z - 1) / z and phi2(z) = (e^z - 1 - z) / z^2, by Taylor series close to 0"""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, z)
    em1 = special.expm1(safe)
    phi1 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24, em1 / safe)
    phi2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120, (em1 - safe) / safe**2)
    return phi1, phi2


class _Stepper():
    """ETD-RK2 propagator with cached phi functions per step size"""

    def __init__(self, config: PMEConfig):
        self.config = config
        self.grid = config.grid
        self.linear = config.linear_symbol
        self.laplacian = -(2 * np.pi * self.grid.xi_norm)**2 * self.grid.dealias_mask
        self.slope = float(config.law.dp(config.rho_bar))
        self._cache = {}

    def coefficients(self, ds: float):
        """e^{c ds}, ds phi1(c ds), ds phi2(c ds)"""
        if ds not in self._cache:
            z = self.linear * ds
            phi1, phi2 = phi_functions(z)
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[ds] = (np.exp(z), ds * phi1, ds * phi2)
        return self._cache[ds]

    def remainder(self, spectrum: np.ndarray) -> np.ndarray:
        """Spectrum of lap(p(N) - p'(rho_bar) N), on the 2/3-rule band"""
        values = self.grid.inverse(spectrum)
        if not np.all(np.isfinite(values)):
            raise DomainError("non finite value in the PME state")
        check_density(values)
        return self.laplacian * self.grid.forward(self.config.law.pressure(values) - self.slope * values)

    def step(self, spectrum: np.ndarray, ds: float) -> Tuple[np.ndarray, np.ndarray]:
        """One ETD-RK2 step; returns the new spectrum and the first order correction term"""
        decay, phi1, phi2 = self.coefficients(ds)
        base = self.remainder(spectrum)
        predictor = decay * spectrum + phi1 * base
        correction = phi2 * (self.remainder(predictor) - base)
        return predictor + correction, correction


def _deviation(grid: PeriodicGrid, values: np.ndarray, rho_bar: float) -> float:
    return grid.integrate((values - rho_bar)**2)


def solve_pme(config: PMEConfig, n0: ScalarField, diagnostics: Optional[List[PMERecord]] = None) -> Trajectory:
    """Integrates the porous medium equation from n0, landing exactly on every snapshot time

    Args:
        config (PMEConfig): parameters
        n0 (ScalarField): positive initial density on the grid of the config
        diagnostics (List[PMERecord], optional): filled with one record per step when given

    Raises:
        ConfigurationError: n0 on another grid or not positive
        SolverError: the density reached the vacuum guard

    Returns:
        Trajectory: snapshots at the configured times
    """
    grid = config.grid
    if n0.grid != grid:
        raise ConfigurationError("the initial density lives on another grid", "grid.points")
    try:
        check_density(n0.values, "initial density")
    except DomainError as exc:
        raise ConfigurationError(str(exc), "data.amplitude") from exc
    stepper = _Stepper(config)
    spectrum = n0.spectrum * grid.dealias_mask
    records = diagnostics if diagnostics is not None else []
    values = grid.inverse(spectrum)
    records.append(PMERecord(0.0, grid.integrate(values), _deviation(grid, values, config.rho_bar), 0.0))
    s, ds = 0.0, config.max_step
    times, snapshots = [], []
    steps, rejected = 0, 0
    for target in config.snapshot_times:
        while target - s > 1e-14 * max(1.0, target):
            remaining = target - s
            if config.adaptive:
                trial = min(ds, config.max_step, remaining)
            else:
                trial = remaining / math.ceil(remaining / config.max_step - 1e-9)
            try:
                proposal, correction = stepper.step(spectrum, trial)
            except DomainError as exc:
                raise SolverError(str(exc), s + trial, Trajectory(times, snapshots) if times else None) from exc
            if config.adaptive:
                error = grid.l2_from_spectrum(correction) / max(1.0, grid.l2_from_spectrum(spectrum))
                factor = SAFETY * math.sqrt(config.tolerance / error) if error > 0 else 2.0
                if error > config.tolerance:
                    rejected += 1
                    ds = trial * max(0.2, factor)
                    continue
                ds = trial * min(2.0, max(0.2, factor)) if trial < remaining else ds
            spectrum = proposal
            s = target if remaining - trial <= 1e-14 * max(1.0, target) else s + trial
            steps += 1
            values = grid.inverse(spectrum)
            records.append(PMERecord(s, grid.integrate(values), _deviation(grid, values, config.rho_bar), trial))
            logger.debug("pme s=%.6g ds=%.3g", s, trial)
        times.append(s)
        snapshots.append(ScalarField(grid, grid.inverse(spectrum)))
    logger.info("pme run M=%d done in %d steps (%d rejected)", grid.points, steps, rejected)
    metadata = {"gamma": config.law.gamma, "rho_bar": config.rho_bar, "time": "slow", "steps": steps}
    return Trajectory(times, snapshots, metadata)


def mode_amplitude(f: ScalarField, wavevector: Tuple[int, ...]) -> float:
    """Amplitude of the real mode with the given lattice vector"""
    index = tuple(k % f.grid.points for k in wavevector)
    return float(2 * np.abs(f.spectrum[index]) / f.grid.points**f.grid.dim)


def linear_decay(config: PMEConfig, k: int, s: float) -> float:
    """Decay factor e^{-p'(rho_bar) (2 pi k / L)^2 s} of the linearised equation"""
    return math.exp(-float(config.law.dp(config.rho_bar)) * (2 * math.pi * k / config.grid.period)**2 * s)


def pme_besov_bound(traj: Trajectory, sigma: float, r: float, rho_bar: float,
                    n0: Optional[ScalarField] = None) -> Report:
    """sup_s ||N(s) - rho_bar||_{B^sigma_{2,r}} against the norm of the initial density

    Args:
        traj (Trajectory): PME snapshots
        sigma (float): smoothness
        r (float): summation exponent
        rho_bar (float): constant state
        n0 (ScalarField, optional): initial density. Defaults to the snapshot at s = 0.

    Raises:
        ConfigurationError: no initial density and no snapshot at s = 0

    Returns:
        Report: sup norm, initial norm and their ratio; a zero initial norm gives ratio 1 flagged degenerate
    """
    if n0 is None and traj.times[0] != 0:
        raise ConfigurationError(f"the first snapshot is at s={traj.times[0]:.6g}, not 0", "pme.snapshot_times")
    norms = [besov_norm(snapshot - rho_bar, sigma, 2, r).value for snapshot in traj.snapshots]
    initial = norms[0] if n0 is None else besov_norm(n0 - rho_bar, sigma, 2, r).value
    sup = max(norms + [initial])
    degenerate = initial == 0
    ratio = 1.0 if degenerate else sup / initial
    value = {"sup_norm": sup, "initial_norm": initial, "ratio": ratio, "per_snapshot": list(zip(traj.times, norms))}
    return Report("pme_besov_bound", {"sigma": sigma, "r": r, "rho_bar": rho_bar, "degenerate": degenerate}, value)
