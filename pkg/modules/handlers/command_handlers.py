"""Handles the execution of the subcommands"""
import logging
from modules.data import read_field, write_field
from modules.debug.errors import EXIT_CODES, SolverError
from modules.experiments.limit import (TauSweepConfig, convergence_report, energy_inequality_audit, run_sweep,
                                       uniform_bounds)
from modules.experiments.verify import bony_verify, commutator_verify, lp_verify, norm_report, sk_verify
from modules.physics.euler import DiagnosticsRecord, EulerRun, SolverConfig, a_priori_ratios, data_norm, initialize, \
    solve
from modules.physics.pme import PMEConfig, PMERecord, pme_besov_bound, solve_pme
from modules.utils import RunInfo

logger = logging.getLogger(__name__)


# region verify
def lp_verify_cmd(info: RunInfo) -> int:
    """Handles the lp-verify subcommand.
    Runs the Littlewood-Paley suites on the configured grid

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    suites = info.suites
    reports = lp_verify(info.grid, info.seed, suites['family_size'], suites['s_list'])
    return info.conclude(reports)


def bony_verify_cmd(info: RunInfo) -> int:
    """Handles the bony-verify subcommand.
    Checks the Bony identity and the K1..K5 split on a random family

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    return info.conclude(bony_verify(info.grid, info.suites['family_size'], info.seed))


def commutator_suite_cmd(info: RunInfo) -> int:
    """Handles the commutator-suite subcommand.
    Runs the homogeneous and inhomogeneous suites for every configured s

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    suites = info.suites
    reports = []
    for homogeneous in (True, False):
        reports.extend(
            commutator_verify(info.grid, suites['s_list'], suites['r'], suites['family_size'], info.seed, info.threads,
                              homogeneous))
    return info.conclude(reports)


def sk_verify_cmd(info: RunInfo) -> int:
    """Handles the sk-verify subcommand.
    Checks the compensating-matrix identities for every configured dimension and exponent

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    suites = info.suites
    reports = sk_verify(suites['dims'], suites['gammas'], suites['directions'], info.seed,
                        info.config['law']['rho_bar'])
    return info.conclude(reports)


def norm_cmd(info: RunInfo) -> int:
    """Handles the norm subcommand.
    Measures the field container given in the configuration, or the configured initial density

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    params = info.config['norm']
    if params.get('field'):
        field = read_field(params['field'])
    else:
        field = initialize(SolverConfig.from_config(info.config)).rho
    report = norm_report(field, params['s'], params['p'], params['r'], params['homogeneous'])
    info.writer.write_json("norm.json", report.to_dict())
    return EXIT_CODES['success']


# endregion


# region solvers
def _write_euler(info: RunInfo, run: EulerRun):
    info.writer.write_csv("diagnostics.csv", DiagnosticsRecord.FIELDS, (record.row() for record in run.diagnostics))
    if run.trajectory is None:
        return
    for index, (rho, u) in enumerate(zip(run.trajectory.snapshots, run.momentum.snapshots)):
        write_field(info.writer.path(f"rho_{index:03d}.rlxf"), rho)
        write_field(info.writer.path(f"u_{index:03d}.rlxf"), u)


def solve_euler_cmd(info: RunInfo) -> int:
    """Handles the solve-euler subcommand.
    Writes the diagnostics table, the snapshots and a summary with the a priori ratios

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    config = SolverConfig.from_config(info.config)
    sweep = info.config['sweep']
    try:
        run = solve(config)
    except SolverError as exc:
        if exc.partial is not None:
            _write_euler(info, exc.partial)
        raise
    _write_euler(info, run)
    summary = {
        "tau": config.tau,
        "data": config.data.label,
        "steps": run.steps,
        "caps": run.caps,
        "times": run.trajectory.times,
        "balance_error": run.balance_error,
        "initial_norm": data_norm(initialize(config), config, sweep['sigma'], sweep['r']),
        "a_priori": a_priori_ratios(run, sweep['sigma'], sweep['r']).to_dict(),
    }
    info.writer.write_json("summary.json", summary)
    return EXIT_CODES['success']


def solve_pme_cmd(info: RunInfo) -> int:
    """Handles the solve-pme subcommand.
    Starts from the configured initial density and writes diagnostics, snapshots and the Besov bound

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    config = PMEConfig.from_config(info.config)
    sweep = info.config['sweep']
    records = []
    n0 = initialize(SolverConfig.from_config(info.config)).rho
    traj = solve_pme(config, n0, records)
    info.writer.write_csv("diagnostics.csv", PMERecord.FIELDS, (record.row() for record in records))
    for index, snapshot in enumerate(traj.snapshots):
        write_field(info.writer.path(f"n_{index:03d}.rlxf"), snapshot)
    bound = pme_besov_bound(traj, sweep['sigma'], sweep['r'], config.rho_bar, n0)
    info.writer.write_json("summary.json", {"times": traj.times, "steps": traj.metadata['steps'],
                                            "bound": bound.to_dict()})
    return EXIT_CODES['success']


# endregion


# region sweeps
def _sweep(info: RunInfo):
    config = TauSweepConfig.from_config(info.config, workers=info.threads)
    result = run_sweep(config)
    document = convergence_report(result)
    info.writer.write_csv("errors.csv", document['header'], document['rows'])
    info.writer.write_json("fits.json", document['fits'])
    return result


def tau_sweep_cmd(info: RunInfo) -> int:
    """Handles the tau-sweep subcommand.
    Writes the (tau, s, error) table and the fitted orders; failed members give the threshold exit code

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    result = _sweep(info)
    if result.failed:
        logger.warning("members %s failed", result.failed)
        return EXIT_CODES['threshold']
    return EXIT_CODES['success']


def audit_energy_cmd(info: RunInfo) -> int:
    """Handles the audit-energy subcommand.
    Runs the sweep, then the uniform energy inequality audit and the uniform bounds report

    Args:
        info (RunInfo): run info

    Returns:
        int: exit code
    """
    result = _sweep(info)
    sweep = info.config['sweep']
    reports = [
        energy_inequality_audit(result, sweep['sigma'], sweep['r'], info.suites['spread_limit']),
        uniform_bounds(result),
    ]
    return info.conclude(reports, "audit.jsonl")


# endregion
