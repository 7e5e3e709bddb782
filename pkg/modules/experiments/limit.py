"""Relaxation-limit sweeps: Euler runs over a list of relaxation times against a porous medium reference"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple
import numpy as np
from scipy import stats
from modules.data.report import Report
from modules.debug.errors import ConfigurationError, SolverError
from modules.physics.euler import (EulerRun, Functionals, SolverConfig, a_priori_ratios, data_norm, energy_functionals,
                                   initialize, snapshot_times, solve)
from modules.physics.pme import PMEConfig, pme_besov_bound, solve_pme
from modules.spectral.dyadic import besov_norm, chemin_lerner_norm
from modules.spectral.grid import Trajectory, VectorField

logger = logging.getLogger(__name__)

REFERENCES = ("pme", "finest")
AUDIT_SAMPLES = 20


@dataclass(frozen=True)
class TauSweepConfig:
    """Parameters of a sweep

    Args:
        base (:class:`SolverConfig`): shared grid, law, data and final time; its tau is ignored
        pme (:class:`PMEConfig`): porous medium parameters, on the same grid
        tau_list (:class:`tuple`): strictly decreasing relaxation times in (0, 1]
        sigma (:class:`float`): smoothness of the functionals
        r (:class:`float`): summation exponent
        delta (:class:`float`): loss of smoothness of the comparison space, in (0, 1)
        comparison_times (:class:`tuple`): slow times where the error is measured
        reference (:class:`str`): pme, or finest for an Euler run at half the smallest tau
        workers (:class:`int`): concurrent member runs
    """
    base: SolverConfig
    pme: PMEConfig
    tau_list: Tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    sigma: float = 1.5
    r: float = 1.0
    delta: float = 0.5
    comparison_times: Tuple[float, ...] = (0.5, 1.0)
    reference: str = "pme"
    workers: int = 1

    def __post_init__(self):
        taus = tuple(float(tau) for tau in self.tau_list)
        if not taus:
            raise ConfigurationError("must not be empty", "sweep.tau_list")
        if any(not 0 < tau <= 1 for tau in taus) or any(a <= b for a, b in zip(taus, taus[1:])):
            raise ConfigurationError("must be strictly decreasing values in (0, 1]", "sweep.tau_list")
        if not 0 < self.delta < 1:
            raise ConfigurationError(f"must lie in (0, 1), got {self.delta}", "sweep.delta")
        if self.reference not in REFERENCES:
            raise ConfigurationError(f"must be one of {REFERENCES}", "sweep.reference")
        if any(not 0 <= t <= self.base.s_end for t in self.comparison_times):
            raise ConfigurationError("comparison times must lie in [0, solver.s_end]", "sweep.comparison_times")
        if self.pme.grid != self.base.grid:
            raise ConfigurationError("the PME reference must share the Euler grid", "grid.points")
        object.__setattr__(self, "tau_list", taus)
        object.__setattr__(self, "comparison_times", tuple(sorted(float(t) for t in self.comparison_times)))

    @classmethod
    def from_config(cls, config: dict, workers: int = 1):
        """Builds the sweep parameters from a configuration dictionary"""
        base = SolverConfig.from_config(config, tau=1.0)
        sweep = config['sweep']
        times = sorted(set(snapshot_times(base.s_end, AUDIT_SAMPLES)) | set(base.snapshot_times)
                       | {float(t) for t in sweep['comparison_times']})
        base = replace(base, snapshot_times=tuple(times))
        pme = PMEConfig.from_config(config, s_end=base.s_end, snapshot_times=tuple(times))
        return cls(base=base,
                   pme=pme,
                   tau_list=tuple(sweep['tau_list']),
                   sigma=sweep['sigma'],
                   r=sweep['r'],
                   delta=sweep['delta'],
                   comparison_times=tuple(sweep['comparison_times']),
                   reference=sweep['reference'],
                   workers=workers)

    @property
    def reference_tau(self) -> float:
        """:class:`float`: tau of the Euler reference run"""
        return self.tau_list[-1] / 2


@dataclass
class MemberRun:
    """One member of the sweep

    Args:
        tau (:class:`float`): relaxation time
        run (:class:`EulerRun`): the run, partial when it failed
        errors (:class:`dict`): comparison time -> ||rho(s) - N(s)|| in B^{sigma - delta}_{2,r}
        functionals (:class:`Functionals`): E, D, S in slow time
        failure (:class:`str`): failure message, None on success
    """
    tau: float
    run: Optional[EulerRun]
    errors: Dict[float, float] = field(default_factory=dict)
    functionals: Optional[Functionals] = None
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        """:class:`bool`: whether the run reached the final time"""
        return self.failure is None


@dataclass
class OrderFit:
    """Least-squares fit of log e against log tau at one comparison time

    Args:
        s (:class:`float`): comparison time
        order (:class:`float`): fitted slope
        intercept (:class:`float`): fitted intercept
        half_width (:class:`float`): half width of the 95% confidence interval of the slope, nan below 3 points
        points (:class:`int`): number of members in the fit
    """
    s: float
    order: float
    intercept: float
    half_width: float
    points: int

    def to_dict(self) -> dict:
        """Plain dictionary of the fit"""
        return {
            "s": self.s,
            "order": self.order,
            "intercept": self.intercept,
            "ci95": [self.order - self.half_width, self.order + self.half_width],
            "points": self.points
        }


@dataclass
class TauSweepResult:
    """Outcome of a sweep

    Args:
        config (:class:`TauSweepConfig`): parameters
        members (:class:`list`): one :class:`MemberRun` per tau, in the order of the tau list
        reference (:class:`Trajectory`): density of the reference solution
        fits (:class:`list`): one :class:`OrderFit` per positive comparison time
    """
    config: TauSweepConfig
    members: List[MemberRun]
    reference: Trajectory
    fits: List[OrderFit]

    @property
    def failed(self) -> List[float]:
        """:class:`list`: relaxation times of the failed members"""
        return [member.tau for member in self.members if not member.ok]


def _member(config: TauSweepConfig, tau: float) -> MemberRun:
    try:
        run = solve(replace(config.base, tau=tau))
    except SolverError as exc:
        logger.error("member tau=%s failed at s=%.6g: %s", tau, exc.s, exc)
        return MemberRun(tau, exc.partial, failure=f"s={exc.s:.6g}: {exc}")
    functionals = energy_functionals(run.entropy, config.sigma, config.r, tau)
    return MemberRun(tau, run, functionals=functionals)


def _reference(config: TauSweepConfig) -> Trajectory:
    if config.reference == "pme":
        return solve_pme(config.pme, initialize(config.base).rho)
    tau = config.reference_tau
    logger.info("reference Euler run at tau=%s", tau)
    return solve(replace(config.base, tau=tau)).trajectory


def _errors(config: TauSweepConfig, member: MemberRun, reference: Trajectory) -> Dict[float, float]:
    errors = {}
    if member.run is None or member.run.trajectory is None:
        return errors
    trajectory = member.run.trajectory
    for s in (0.0, ) + config.comparison_times:
        if s > trajectory.times[-1] + 1e-12:
            continue
        difference = trajectory.at(s) - reference.at(s)
        errors[s] = besov_norm(difference, config.sigma - config.delta, 2, config.r).value
    return errors


def fit_order(s: float, taus: List[float], errors: List[float]) -> OrderFit:
    """Fits log e = order log tau + intercept over the members with a positive finite error

    Returns:
        OrderFit: slope, intercept and 95% confidence half width
    """
    pairs = [(tau, e) for tau, e in zip(taus, errors) if e > 0 and math.isfinite(e)]
    if len(pairs) < 2:
        return OrderFit(s, math.nan, math.nan, math.nan, len(pairs))
    x = np.log([tau for tau, _ in pairs])
    y = np.log([e for _, e in pairs])
    fit = stats.linregress(x, y)
    half_width = float(stats.t.ppf(0.975, len(pairs) - 2) * fit.stderr) if len(pairs) > 2 else math.nan
    return OrderFit(s, float(fit.slope), float(fit.intercept), half_width, len(pairs))


def run_sweep(config: TauSweepConfig) -> TauSweepResult:
    """Runs the Euler member per tau concurrently and the reference once, then measures and fits the errors

    Args:
        config (TauSweepConfig): parameters

    Returns:
        TauSweepResult: members (failed ones marked), reference and fitted orders
    """
    logger.info("sweep over tau=%s with %s reference", list(config.tau_list), config.reference)
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        reference_future = pool.submit(_reference, config)
        members = list(pool.map(lambda tau: _member(config, tau), config.tau_list))
        reference = reference_future.result()
    for member in members:
        member.errors = _errors(config, member, reference)
    fits = []
    for s in config.comparison_times:
        if s <= 0:
            continue
        measured = [member for member in members if s in member.errors]
        fits.append(fit_order(s, [m.tau for m in measured], [m.errors[s] for m in measured]))
    for fit in fits:
        logger.info("s=%s: fitted order %.3f (+/- %.3f) over %d members", fit.s, fit.order, fit.half_width, fit.points)
    return TauSweepResult(config, members, reference, fits)


def is_monotone(errors: List[float], tolerance: float = 0.05) -> bool:
    """Whether errors ordered by decreasing tau do not increase, allowing one inversion within tolerance
    at the coarsest pair"""
    inversions = [i for i, (a, b) in enumerate(zip(errors, errors[1:])) if b > a]
    if not inversions:
        return True
    return inversions == [0] and errors[1] <= errors[0] * (1 + tolerance)


def _fast_norms(run: EulerRun, sigma: float, r: float) -> Tuple[float, float]:
    """Left side of the uniform energy inequality with mu0 = 1, and the initial norm, in fast time with m = tau u"""
    tau = run.config.tau
    rho_bar = run.config.rho_bar
    density = run.trajectory.rescaled(1 / tau)
    momentum = run.momentum.rescaled(1 / tau)
    state = Trajectory(density.times, [
        VectorField(rho.grid, np.concatenate([(rho.values - rho_bar)[None], tau * u.values]))
        for rho, u in zip(density.snapshots, momentum.snapshots)
    ])
    energy = chemin_lerner_norm(state, np.inf, sigma, 2, r, homogeneous=False).value
    scaled_m = momentum.map(lambda u: VectorField(u.grid, math.sqrt(tau) * u.values))
    gradients = state.map(
        lambda w: VectorField(w.grid, math.sqrt(tau) * np.concatenate([part.gradient().values for part in w])))
    damping = chemin_lerner_norm(scaled_m, 2, sigma, 2, r, homogeneous=False).value
    smoothing = chemin_lerner_norm(gradients, 2, sigma - 1, 2, r, homogeneous=False).value
    initial = data_norm(initialize(run.config), run.config, sigma, r)
    return energy + damping + smoothing, initial


def energy_inequality_audit(result: TauSweepResult, sigma: float, r: float, spread_limit: float = 1.3) -> Report:
    """Checks that one constant bounds the uniform energy inequality over the sweep, with mu0 = 1.
    Also reports the feasibility of the nonlinear inequality E + D <= C (E(0) + E^1/2 D + E D)

    Args:
        result (TauSweepResult): a finished sweep
        sigma (float): smoothness
        r (float): summation exponent
        spread_limit (float, optional): largest accepted max/min ratio over tau. Defaults to 1.3.

    Returns:
        Report: per-tau ratios, fitted C0, spread and the nonlinear feasibility; passed is None when degenerate
    """
    per_tau, nonlinear = [], []
    degenerate = False
    for member in result.members:
        if not member.ok:
            per_tau.append({"tau": member.tau, "failure": member.failure})
            continue
        lhs, rhs = _fast_norms(member.run, sigma, r)
        t_end = member.run.config.s_end / member.tau
        if rhs == 0:
            degenerate = True
            per_tau.append({"tau": member.tau, "lhs": lhs, "rhs": rhs, "ratio": None, "T_end": t_end})
            continue
        ratios = a_priori_ratios(member.run, sigma, r).value
        nonlinear.append((member.tau, ratios["nonlinear"], ratios["S"]))
        per_tau.append({"tau": member.tau, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, "T_end": t_end})
    ratios = [(entry["tau"], entry["ratio"]) for entry in per_tau if entry.get("ratio") is not None]
    value = {"per_tau": per_tau, "degenerate": degenerate}
    passed = None
    if ratios:
        worst_tau, c0 = max(ratios, key=lambda pair: pair[1])
        spread = c0 / min(ratio for _, ratio in ratios)
        value.update({"C0": c0, "worst_tau": worst_tau, "spread": spread})
        passed = spread <= spread_limit and not result.failed
    if nonlinear:
        value["nonlinear"] = {
            "C": max(ratio for _, ratio, _ in nonlinear),
            "S_max": max(sup for _, _, sup in nonlinear),
            "feasible": all(math.isfinite(ratio) for _, ratio, _ in nonlinear),
            "per_tau": [{"tau": tau, "ratio": ratio, "S": sup} for tau, ratio, sup in nonlinear]
        }
    if result.config.reference == "pme":
        n0 = initialize(result.config.base).rho
        bound = pme_besov_bound(result.reference, sigma, r, result.config.base.rho_bar, n0).value
        value["pme_bound"] = {key: bound[key] for key in ("sup_norm", "initial_norm", "ratio")}
        if passed is not None and "C0" in value:
            passed = passed and bound["ratio"] <= value["C0"]
    params = {"sigma": sigma, "r": r, "mu0": 1.0, "time": "fast", "spread_limit": spread_limit}
    return Report("energy_inequality_audit", params, value, passed=passed)


def uniform_bounds(result: TauSweepResult, factor: float = 2.0) -> Report:
    """Sizes across tau of u = rho v / tau in L^2(0, S; B^sigma_{2,r}), of rho - rho_bar in L^inf(B^sigma_{2,r})
    and of the functionals E and S, each against its value at the first tau"""
    config = result.config
    rows = []
    for member in result.members:
        if not member.ok:
            continue
        run = member.run
        momentum = chemin_lerner_norm(run.momentum, 2, config.sigma, 2, config.r, homogeneous=False).value
        density = chemin_lerner_norm(run.trajectory.map(lambda rho: rho - config.base.rho_bar), np.inf, config.sigma, 2,
                                     config.r, homogeneous=False).value
        rows.append({
            "tau": member.tau,
            "momentum": momentum,
            "density": density,
            "E": member.functionals.energy,
            "S": member.functionals.sup
        })
    passed = None
    if rows:
        first = rows[0]
        passed = all(row[key] <= factor * first[key] for row in rows for key in ("E", "S"))
    return Report("uniform_bounds", {"sigma": config.sigma, "r": config.r, "factor": factor}, rows, passed=passed)


def convergence_report(result: TauSweepResult) -> dict:
    """Plot-ready tables of the sweep

    Returns:
        dict: header and rows of the (tau, s, error) table, the fits and the per-tau functionals
    """
    rows = []
    for member in sorted(result.members, key=lambda m: -m.tau):
        for s in sorted(member.errors):
            rows.append([member.tau, s, member.errors[s]])
    members = []
    for member in sorted(result.members, key=lambda m: -m.tau):
        entry = {"tau": member.tau, "ok": member.ok, "failure": member.failure}
        if member.functionals is not None:
            entry.update({"E": member.functionals.energy, "D": member.functionals.dissipation,
                          "S": member.functionals.sup})
        if member.run is not None:
            entry.update({"steps": member.run.steps, "caps": member.run.caps})
        members.append(entry)
    monotone = {}
    for s in result.config.comparison_times:
        curve = [m.errors[s] for m in result.members if s in m.errors]
        monotone[s] = is_monotone(curve) if s > 0 else None
    fits = {
        "reference": result.config.reference,
        "sigma": result.config.sigma,
        "r": result.config.r,
        "delta": result.config.delta,
        "data": result.config.base.data.label,
        "fits": [fit.to_dict() for fit in result.fits],
        "monotone": [{"s": s, "monotone": flag} for s, flag in monotone.items()],
        "members": members
    }
    return {"header": ["tau", "s", "error"], "rows": rows, "fits": fits}
