"""Reproducible families of test fields"""
from typing import Sequence
import numpy as np
from modules.spectral.grid import PeriodicGrid, ScalarField, Trajectory
from modules.spectral.dyadic import build_partition


def pure_mode(grid: PeriodicGrid, wavevector: Sequence[int], amplitude: float = 1.0, phase: float = 0.0) -> ScalarField:
    """amplitude * cos(2 pi k.x / L + phase) for an integer lattice vector k

    Args:
        grid (PeriodicGrid): grid
        wavevector (Sequence[int]): lattice vector k, one entry per axis
        amplitude (float, optional): amplitude. Defaults to 1.0.
        phase (float, optional): phase. Defaults to 0.0.

    Returns:
        ScalarField: the mode
    """
    coords = grid.coordinates()
    argument = sum(2 * np.pi * k * x / grid.period for k, x in zip(wavevector, coords))
    return ScalarField(grid, amplitude * np.cos(argument + phase))


def resample(field: ScalarField, points: int) -> ScalarField:
    """Trigonometric interpolation of a field on a finer grid of the same box

    Args:
        field (ScalarField): field to interpolate
        points (int): points per axis of the finer grid

    Returns:
        ScalarField: the same band-limited function sampled on the finer grid
    """
    fine = PeriodicGrid(field.grid.dim, points, field.grid.period)
    return ScalarField(fine, fine.inverse(field.grid.pad_spectrum(field.spectrum, points)))


def unit_l2(field: ScalarField) -> ScalarField:
    """The field divided by its L^2 norm"""
    return field * (1.0 / field.norm(2))


def random_smooth_field(grid: PeriodicGrid, rng: np.random.Generator, decay: float = 3.0,
                        amplitude: float = 1.0, mean: float = 0.0) -> ScalarField:
    """Random field with Gaussian coefficients damped like (1 + |xi|)^-decay inside the 2/3-rule band

    Args:
        grid (PeriodicGrid): grid
        rng (np.random.Generator): random generator
        decay (float, optional): algebraic decay of the spectrum. Defaults to 3.0.
        amplitude (float, optional): L^2 norm of the fluctuation. Defaults to 1.0.
        mean (float, optional): mean value. Defaults to 0.0.

    Returns:
        ScalarField: the field
    """
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spectrum = noise * (1.0 + grid.xi_norm)**(-decay) * grid.dealias_mask
    spectrum.flat[0] = 0
    fluctuation = unit_l2(ScalarField(grid, grid.inverse(spectrum)))
    return fluctuation * amplitude + mean


def random_block_field(grid: PeriodicGrid, q: int, rng: np.random.Generator) -> ScalarField:
    """Homogeneous block q of a field whose spectrum has unit modulus and random phases

    Args:
        grid (PeriodicGrid): grid
        q (int): block index
        rng (np.random.Generator): random generator

    Returns:
        ScalarField: field with spectrum |F Phi_q| and random phases
    """
    phases = grid.forward(rng.standard_normal(grid.shape))
    modulus = np.abs(phases)
    phases = np.where(modulus > 0, phases / np.where(modulus > 0, modulus, 1.0), 1.0)
    return ScalarField.from_spectrum(grid, phases * build_partition(grid).multiplier(q))


def random_trajectory(grid: PeriodicGrid, rng: np.random.Generator, times: Sequence[float],
                      decay: float = 3.0) -> Trajectory:
    """Smooth trajectory a(t) f + b(t) g with random smooth f, g and random trigonometric a, b"""
    first = random_smooth_field(grid, rng, decay)
    second = random_smooth_field(grid, rng, decay)
    freqs = rng.uniform(0.5, 2.0, size=2)
    shifts = rng.uniform(0, 2 * np.pi, size=2)
    snapshots = [
        first * np.cos(freqs[0] * t + shifts[0]) + second * np.sin(freqs[1] * t + shifts[1]) for t in times
    ]
    return Trajectory(times, snapshots)
