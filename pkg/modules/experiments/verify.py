"""Acceptance suites behind the verify-type subcommands.
Every runner returns a list of :class:`Report` whose passed flag drives the exit status
"""
import logging
from typing import Iterable, List, Optional, Sequence
import numpy as np
from modules.data.report import Report
from modules.physics.symmetry import PressureLaw, sk_identity_check
from modules.spectral.bony import bony_split, commutator_estimate_suite, random_pairs, term_decomposition
from modules.spectral.dyadic import (BUMP_INNER, BUMP_OUTER, bernstein_ratio, besov_norm, block, build_partition,
                                     sobolev_consistency)
from modules.spectral.grid import PeriodicGrid, ScalarField
from modules.spectral.sampling import random_block_field, random_smooth_field, resample

logger = logging.getLogger(__name__)

UNITY_TOLERANCE = 1e-12
RECONSTRUCTION_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-10
BERNSTEIN_SPREAD = 1.2
SOBOLEV_SPREAD = 3.0
REFINEMENT_TOLERANCE = 0.1
COMMUTATOR_TOLERANCE = 0.3


def partition_of_unity_check(grid: PeriodicGrid) -> Report:
    """Largest deviation from 1 of sum_q F Phi_q and of F Psi + sum_{q >= 0} F Phi_q over the resolved lattice"""
    partition = build_partition(grid)
    radius = grid.xi_norm
    resolved = (radius >= BUMP_INNER * 2.0**partition.q_min) & (radius <= BUMP_OUTER * 2.0**partition.q_max)
    homogeneous = sum(partition.phi_hat[q] for q in partition.homogeneous_range)
    inhomogeneous = partition.psi_hat + sum(partition.phi_hat[q] for q in partition.homogeneous_range if q >= 0)
    homogeneous_error = float(np.max(np.abs(homogeneous - 1)[resolved]))
    inhomogeneous_error = float(max(np.max(np.abs(inhomogeneous - 1)[resolved]), abs(inhomogeneous.flat[0] - 1)))
    value = {"homogeneous": homogeneous_error, "inhomogeneous": inhomogeneous_error}
    params = {"dim": grid.dim, "points": grid.points, "q_min": partition.q_min, "q_max": partition.q_max}
    return Report("partition_of_unity", params, value,
                  passed=bool(max(homogeneous_error, inhomogeneous_error) < UNITY_TOLERANCE))


def reconstruction_check(f: ScalarField) -> Report:
    """Relative L^2 error of sum_{q >= -1} Delta_q f against f"""
    partition = build_partition(f.grid)
    total = ScalarField.zeros(f.grid)
    for q in partition.inhomogeneous_range:
        total = total + block(f, q, homogeneous=False)
    scale = f.norm(2)
    error = (total - f).norm(2) / scale if scale > 0 else (total - f).norm(2)
    return Report("reconstruction", {"points": f.grid.points}, error, passed=bool(error < RECONSTRUCTION_TOLERANCE))


def bernstein_sweep(grid: PeriodicGrid, blocks: Iterable[int], count: int = 50, seed: int = 0) -> Report:
    """First order L^2 Bernstein ratios of annulus-supported random fields, block by block.
    Passes when the per-block suprema of both ratios stay within a factor 1.2 of each other

    Args:
        grid (PeriodicGrid): grid
        blocks (Iterable[int]): homogeneous block indices
        count (int, optional): fields per block. Defaults to 50.
        seed (int, optional): seed. Defaults to 0.

    Returns:
        Report: per-block sup ratios and their spread
    """
    rng = np.random.default_rng(seed)
    per_block = []
    for q in blocks:
        ratios = [bernstein_ratio(random_block_field(grid, q, rng), 1, 2, 2, 2.0**q).value for _ in range(count)]
        per_block.append((q, max(r["upper"] for r in ratios), min(r["lower"] for r in ratios)))
        logger.debug("bernstein block %d: upper %.6g", q, per_block[-1][1])
    uppers = [upper for _, upper, _ in per_block]
    lowers = [lower for _, _, lower in per_block]
    spread = max(max(uppers) / min(uppers), max(lowers) / min(lowers))
    value = {"spread": spread, "sup_upper": max(uppers), "inf_lower": min(lowers)}
    return Report("bernstein_sweep", {"order": 1, "a": 2, "b": 2, "count": count}, value,
                  [[q, upper, lower] for q, upper, lower in per_block],
                  passed=bool(spread <= BERNSTEIN_SPREAD))


def sobolev_suite(grid: PeriodicGrid, s: float, count: int = 30, seed: int = 0) -> Report:
    """B^s_{2,2} against H^s over a random suite on M and 2M points.
    Passes when the two-sided spread is at most 3 and moves by at most 10% under refinement"""
    rng = np.random.default_rng(seed)
    fields = [random_smooth_field(grid, rng) for _ in range(count)]
    coarse = [sobolev_consistency(f, s).value for f in fields]
    fine = [sobolev_consistency(resample(f, 2 * grid.points), s).value for f in fields]
    spread, fine_spread = max(coarse) / min(coarse), max(fine) / min(fine)
    drift = abs(fine_spread / spread - 1)
    value = {"spread": spread, "refined_spread": fine_spread, "drift": drift, "min": min(coarse), "max": max(coarse)}
    return Report("sobolev_suite", {"s": s, "count": count}, value,
                  passed=bool(spread <= SOBOLEV_SPREAD and drift <= REFINEMENT_TOLERANCE))


def almost_orthogonality_check(f: ScalarField) -> Report:
    """Largest L^2 norm of Delta_p Delta_q f over |p - q| >= 2, relative to ||f||"""
    partition = build_partition(f.grid)
    worst = 0.0
    for q in partition.homogeneous_range:
        inner = block(f, q)
        for p in partition.homogeneous_range:
            if abs(p - q) >= 2:
                worst = max(worst, block(inner, p).norm(2))
    scale = f.norm(2)
    worst = worst / scale if scale > 0 else worst
    return Report("almost_orthogonality", {"points": f.grid.points}, worst, passed=bool(worst == 0.0))


def lp_verify(grid: PeriodicGrid, seed: int = 0, count: int = 30, s_list: Sequence[float] = (0.5, 1.5, 2.5),
              bernstein_count: int = 50) -> List[Report]:
    """Partition of unity, reconstruction, almost orthogonality, Bernstein and Sobolev suites on one grid"""
    rng = np.random.default_rng(seed)
    partition = build_partition(grid)
    reports = [partition_of_unity_check(grid)]
    samples = [random_smooth_field(grid, rng, mean=rng.uniform(-1, 1)) for _ in range(count)]
    reconstruction = [reconstruction_check(f) for f in samples]
    worst = max(reconstruction, key=lambda report: report.value)
    reports.append(Report("reconstruction", {"points": grid.points, "count": count}, worst.value,
                          passed=all(report.passed for report in reconstruction)))
    reports.append(almost_orthogonality_check(samples[0]))
    # blocks whose annulus fits inside the lattice along each axis
    blocks = [q for q in range(0, min(5, partition.q_max) + 1) if BUMP_OUTER * 2.0**q <= grid.points / (2 * grid.period)]
    if blocks:
        reports.append(bernstein_sweep(grid, blocks, bernstein_count, seed))
    reports.extend(sobolev_suite(grid, s, count, seed) for s in s_list)
    return reports


def bony_verify(grid: PeriodicGrid, family_size: int = 30, seed: int = 0,
                blocks: Optional[Sequence[int]] = None) -> List[Report]:
    """Bony identity and K1..K5 decomposition residuals over a random family"""
    partition = build_partition(grid)
    blocks = list(partition.homogeneous_range) if blocks is None else list(blocks)
    reports = []
    for index, (f, g) in enumerate(random_pairs(grid, family_size, seed)):
        split = bony_split(f, g)
        cache = {"Tfg": split.Tfg, "Tgf": split.Tgf, "Rfg": split.Rfg}
        decompositions = [term_decomposition(f, g, q, cache=cache) for q in blocks]
        residual = max(d.residual for d in decompositions)
        locality = max(d.locality_residual for d in decompositions)
        value = {"bony_residual": split.residual, "term_residual": residual, "locality_residual": locality}
        reports.append(Report("bony_identity", {"pair": index}, value,
                              passed=bool(max(split.residual, residual, locality) < IDENTITY_TOLERANCE)))
        logger.debug("pair %d: bony %.3g terms %.3g", index, split.residual, residual)
    return reports


def commutator_verify(grid: PeriodicGrid, s_list: Sequence[float], r: float = 1, family_size: int = 30, seed: int = 0,
                      workers: int = 1, homogeneous: bool = True) -> List[Report]:
    """Commutator suites per s on M and 2M points with the same family.
    Passes when the identity residuals are at roundoff and the sup l^r norm moves by at most 30%"""
    pairs = random_pairs(grid, family_size, seed)
    fine_pairs = [(resample(f, 2 * grid.points), resample(g, 2 * grid.points)) for f, g in pairs]
    fine_grid = fine_pairs[0][0].grid
    reports = []
    for s in s_list:
        coarse = commutator_estimate_suite(grid, s, 2, r, homogeneous=homogeneous, workers=workers, pairs=pairs)
        fine = commutator_estimate_suite(fine_grid, s, 2, r, homogeneous=homogeneous, workers=workers, pairs=fine_pairs)
        drift = abs(fine.sup_lr_norm / coarse.sup_lr_norm - 1) if coarse.sup_lr_norm > 0 else 0.0
        value = {
            "sup_lr_norm": coarse.sup_lr_norm,
            "refined_sup_lr_norm": fine.sup_lr_norm,
            "drift": drift,
            "sup_ratio": coarse.sup_ratio,
            "max_residual": max(coarse.max_residual, fine.max_residual),
        }
        passed = bool(np.isfinite(coarse.sup_lr_norm) and drift <= COMMUTATOR_TOLERANCE
                      and value["max_residual"] < IDENTITY_TOLERANCE)
        reports.append(Report("commutator_suite", {"s": s, "r": r, "homogeneous": homogeneous,
                                                   "family_size": family_size}, value,
                              [report.to_dict() for report in coarse.reports], passed=passed))
    return reports


def sk_verify(dims: Sequence[int], gammas: Sequence[float], directions: int = 200, seed: int = 0,
              rho_bar: float = 1.0) -> List[Report]:
    """Compensating-matrix identities over random directions, one report per (N, gamma)"""
    rng = np.random.default_rng(seed)
    reports = []
    for dim in dims:
        for gamma in gammas:
            law = PressureLaw(gamma)
            checks = [sk_identity_check(rng.standard_normal(dim), law, rho_bar) for _ in range(directions)]
            skew = max(check.value["skew_residual"] for check in checks)
            sk = max(check.value["sk_residual"] for check in checks)
            reports.append(Report("sk_identity", {"N": dim, "gamma": gamma, "rho_bar": rho_bar,
                                                  "directions": directions},
                                  {"skew_residual": skew, "sk_residual": sk},
                                  passed=all(check.passed for check in checks)))
    return reports


def norm_report(f, s: float, p: float, r: float, homogeneous: bool) -> Report:
    """Besov norm of a field as a report"""
    return besov_norm(f, s, p, r, homogeneous).to_report(points=f.grid.points, dim=f.grid.dim)
