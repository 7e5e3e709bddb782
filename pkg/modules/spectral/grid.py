"""Periodic grid, grid functions and time-sampled trajectories.

The torus [0, L)^N stands in for R^N. Frequencies follow the cycles convention:
lattice index k maps to the physical frequency xi = k / L and a derivative
multiplies the spectrum by 2*pi*i*xi.
"""
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union
import numpy as np
from scipy import fft as sp_fft
from modules.debug.errors import ConfigurationError, DomainError, PreconditionError

FFT_WORKERS = 1


def set_fft_workers(workers: int):
    """Sets the number of threads used by every transform of the package

    Args:
        workers (int): number of threads, at least 1
    """
    global FFT_WORKERS  # pylint: disable=global-statement
    FFT_WORKERS = max(int(workers), 1)


@dataclass(frozen=True)
class PeriodicGrid:
    """Discretised torus [0, L)^N with M points per axis

    Args:
        dim (:class:`int`): space dimension N
        points (:class:`int`): points per axis M, a power of two, at least 8
        period (:class:`float`): side length L of the box. Defaults to 2*pi
    """
    dim: int
    points: int
    period: float = 2 * np.pi
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"dimension must be positive, got {self.dim}", "grid.dim")
        if self.points < 8 or self.points & (self.points - 1):
            raise ConfigurationError(f"points per axis must be a power of two >= 8, got {self.points}", "grid.points")
        if not self.period > 0:
            raise ConfigurationError(f"period must be positive, got {self.period}", "grid.period")

    def _cached(self, key: str, builder):
        if key not in self._cache:
            value = builder()
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            self._cache[key] = value
        return self._cache[key]

    @property
    def shape(self) -> Tuple[int, ...]:
        """:class:`tuple`: shape of a scalar grid function"""
        return (self.points, ) * self.dim

    @property
    def spacing(self) -> float:
        """:class:`float`: grid spacing L / M"""
        return self.period / self.points

    @property
    def volume(self) -> float:
        """:class:`float`: measure of the box, L^N"""
        return self.period**self.dim

    @property
    def lattice(self) -> np.ndarray:
        """:class:`numpy.ndarray`: integer lattice indices along one axis, in FFT order"""
        return self._cached("lattice", lambda: np.rint(sp_fft.fftfreq(self.points, d=1.0 / self.points)).astype(int))

    @property
    def xi(self) -> Tuple[np.ndarray, ...]:
        """:class:`tuple`: physical frequency xi_j = k_j / L on the full lattice, one array per axis"""

        def build():
            xi1 = self.lattice / self.period
            grids = np.meshgrid(*([xi1] * self.dim), indexing="ij")
            for grid in grids:
                grid.setflags(write=False)
            return tuple(grids)

        return self._cached("xi", build)

    @property
    def xi_norm(self) -> np.ndarray:
        """:class:`numpy.ndarray`: |xi| on the full lattice"""
        return self._cached("xi_norm", lambda: np.sqrt(sum(component**2 for component in self.xi)))

    @property
    def xi_min(self) -> float:
        """:class:`float`: smallest nonzero |xi| on the lattice"""
        return 1.0 / self.period

    @property
    def xi_max(self) -> float:
        """:class:`float`: largest |xi| on the lattice"""
        return float(self.xi_norm.max())

    @property
    def derivative_symbols(self) -> Tuple[np.ndarray, ...]:
        """:class:`tuple`: 2*pi*i*xi_j per axis, with the Nyquist mode of each axis set to zero"""

        def build():
            symbols = []
            nyquist = self.lattice == -self.points // 2
            for axis, component in enumerate(self.xi):
                symbol = 2j * np.pi * component
                index = [slice(None)] * self.dim
                index[axis] = nyquist
                symbol[tuple(index)] = 0
                symbol.setflags(write=False)
                symbols.append(symbol)
            return tuple(symbols)

        return self._cached("derivative_symbols", build)

    @property
    def dealias_mask(self) -> np.ndarray:
        """:class:`numpy.ndarray`: 2/3-rule mask, True where every |k_j| <= M/3"""

        def build():
            cutoff = self.points // 3
            keep = np.abs(self.lattice) <= cutoff
            grids = np.meshgrid(*([keep] * self.dim), indexing="ij")
            return np.logical_and.reduce(grids)

        return self._cached("dealias_mask", build)

    @property
    def k_max_dealiased(self) -> float:
        """:class:`float`: largest angular wavenumber |2*pi*xi| kept by the 2/3 rule"""
        return float(2 * np.pi * np.sqrt(self.dim) * (self.points // 3) / self.period)

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Physical coordinates of the grid points

        Returns:
            tuple: one array per axis, shaped like the grid
        """
        x1 = np.arange(self.points) * self.spacing
        return tuple(np.meshgrid(*([x1] * self.dim), indexing="ij"))

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Unnormalised forward transform over the last N axes"""
        axes = tuple(range(-self.dim, 0))
        return sp_fft.fftn(values, axes=axes, workers=FFT_WORKERS)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward`, real part"""
        axes = tuple(range(-self.dim, 0))
        return sp_fft.ifftn(spectrum, axes=axes, workers=FFT_WORKERS).real

    def l2_from_spectrum(self, spectrum: np.ndarray) -> float:
        """L^2 norm over the box of the function with the given unnormalised spectrum (Parseval)"""
        total = float(np.sum(np.abs(spectrum)**2))
        return float(np.sqrt(total * self.volume / self.points**(2 * self.dim)))

    def integrate(self, values: np.ndarray) -> float:
        """Integral over the box (rectangle rule, spectrally exact for band-limited functions)"""
        return float(np.sum(values) * self.spacing**self.dim)

    def dealiased_product(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Alias-free product of two real grid functions.
        Both spectra are zero padded to 3M/2 points per axis, multiplied on the fine grid
        and truncated back to the M-lattice. The Nyquist modes of the inputs are dropped.

        Args:
            left (np.ndarray): values of the first factor
            right (np.ndarray): values of the second factor

        Returns:
            np.ndarray: values of the product on the grid
        """
        fine = 3 * self.points // 2
        padded = [self.pad_spectrum(self.forward(values), fine) for values in (left, right)]
        axes = tuple(range(-self.dim, 0))
        fine_values = [sp_fft.ifftn(spectrum, axes=axes, workers=FFT_WORKERS).real for spectrum in padded]
        fine_spectrum = sp_fft.fftn(fine_values[0] * fine_values[1], axes=axes, workers=FFT_WORKERS)
        return self.inverse(self.truncate_spectrum(fine_spectrum, fine))

    def pad_spectrum(self, spectrum: np.ndarray, fine: int) -> np.ndarray:
        """Embeds an M-lattice spectrum in a finer lattice of the given size, Nyquist modes dropped"""
        shifted = sp_fft.fftshift(spectrum, axes=tuple(range(-self.dim, 0)))
        index = [slice(None)] * self.dim
        for axis in range(self.dim):  # fftshift puts the Nyquist mode first along each axis
            index_axis = list(index)
            index_axis[axis] = 0
            shifted[tuple(index_axis)] = 0
        start = (fine - self.points) // 2
        out = np.zeros((fine, ) * self.dim, dtype=complex)
        out[tuple(slice(start, start + self.points) for _ in range(self.dim))] = shifted
        out = sp_fft.ifftshift(out, axes=tuple(range(-self.dim, 0)))
        return out * (fine / self.points)**self.dim

    def truncate_spectrum(self, spectrum: np.ndarray, fine: int) -> np.ndarray:
        """Restricts a spectrum of a finer lattice to the M-lattice"""
        shifted = sp_fft.fftshift(spectrum, axes=tuple(range(-self.dim, 0)))
        start = (fine - self.points) // 2
        out = shifted[tuple(slice(start, start + self.points) for _ in range(self.dim))].copy()
        out = sp_fft.ifftshift(out, axes=tuple(range(-self.dim, 0)))
        return out * (self.points / fine)**self.dim

    def multi_indices(self, order: int) -> Iterator[Tuple[int, ...]]:
        """All multi-indices alpha with |alpha| = order in N dimensions"""
        for alpha in iter_product(range(order + 1), repeat=self.dim):
            if sum(alpha) == order:
                yield alpha


class ScalarField():
    """Real grid function with its spectrum, both fixed at construction

    Args:
        grid (:class:`PeriodicGrid`): grid the field lives on
        values (:class:`numpy.ndarray`): values at the grid points, shaped like the grid
    """
    components = 1

    def __init__(self, grid: PeriodicGrid, values: np.ndarray, spectrum: Optional[np.ndarray] = None):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            raise PreconditionError(f"field of shape {values.shape} does not fit grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("non finite value", tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0]))
        self.grid = grid
        self._values = values
        self._values.setflags(write=False)
        self._spectrum = grid.forward(values) if spectrum is None else np.array(spectrum, dtype=complex)
        self._spectrum.setflags(write=False)

    @classmethod
    def from_spectrum(cls, grid: PeriodicGrid, spectrum: np.ndarray):
        """Builds a field from an unnormalised Hermitian spectrum, which is kept as the cache.
        Imaginary round-off of the inverse is dropped

        Args:
            grid (PeriodicGrid): grid of the field
            spectrum (np.ndarray): spectrum in FFT order

        Returns:
            ScalarField: new field
        """
        return cls(grid, grid.inverse(spectrum), spectrum)

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: float):
        """Constant field"""
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def zeros(cls, grid: PeriodicGrid):
        """Zero field"""
        return cls.constant(grid, 0.0)

    @property
    def values(self) -> np.ndarray:
        """:class:`numpy.ndarray`: read-only values at the grid points"""
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        """:class:`numpy.ndarray`: read-only unnormalised spectrum"""
        return self._spectrum

    @property
    def mean(self) -> float:
        """:class:`float`: average over the box"""
        return float(self._spectrum.flat[0].real / self._values.size)

    def filtered(self, multiplier: np.ndarray):
        """Applies a Fourier multiplier

        Args:
            multiplier (np.ndarray): symbol sampled on the lattice

        Returns:
            ScalarField: filtered field
        """
        return ScalarField.from_spectrum(self.grid, self._spectrum * multiplier)

    def derivative(self, alpha: Sequence[int]):
        """Spectral partial derivative d^alpha

        Args:
            alpha (Sequence[int]): multi-index

        Returns:
            ScalarField: derivative
        """
        symbol = np.ones(self.grid.shape, dtype=complex)
        for axis, order in enumerate(alpha):
            symbol = symbol * self.grid.derivative_symbols[axis]**order
        return self.filtered(symbol)

    def gradient(self):
        """Spectral gradient

        Returns:
            VectorField: the N partial derivatives
        """
        return VectorField(self.grid, [self.grid.inverse(self._spectrum * symbol) for symbol in self.grid.derivative_symbols])

    def norm(self, p: float = 2) -> float:
        """L^p norm over the box, p in {2, inf}

        Args:
            p (float, optional): integrability exponent. Defaults to 2.

        Returns:
            float: the norm
        """
        if p == 2:
            return self.grid.l2_from_spectrum(self._spectrum)
        if p == np.inf:
            return float(np.max(np.abs(self._values)))
        raise PreconditionError(f"only p in {{2, inf}} is supported, got {p}")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self._values + other.values, self._spectrum + other.spectrum)
        return ScalarField(self.grid, self._values + other)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self._values - other.values, self._spectrum - other.spectrum)
        return ScalarField(self.grid, self._values - other)

    def __mul__(self, scalar: float):
        return ScalarField(self.grid, self._values * scalar, self._spectrum * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"ScalarField(dim={self.grid.dim}, M={self.grid.points}, mean={self.mean:.6g})"


class VectorField():
    """Grid function with N components

    Args:
        grid (:class:`PeriodicGrid`): grid the field lives on
        values (:class:`numpy.ndarray`): values with a leading component axis
    """

    def __init__(self, grid: PeriodicGrid, values: Union[np.ndarray, Sequence[np.ndarray]]):
        values = np.array(values, dtype=float)
        if values.shape[1:] != grid.shape:
            raise PreconditionError(f"vector field of shape {values.shape} does not fit grid {grid.shape}")
        self.grid = grid
        self._parts = [ScalarField(grid, component) for component in values]
        self._values = values
        self._values.setflags(write=False)

    @classmethod
    def zeros(cls, grid: PeriodicGrid, components: Optional[int] = None):
        """Zero vector field with N components unless told otherwise"""
        return cls(grid, np.zeros((components or grid.dim, ) + grid.shape))

    @property
    def components(self) -> int:
        """:class:`int`: number of components"""
        return len(self._parts)

    @property
    def values(self) -> np.ndarray:
        """:class:`numpy.ndarray`: read-only values, component axis first"""
        return self._values

    def __getitem__(self, index: int) -> ScalarField:
        return self._parts[index]

    def __iter__(self) -> Iterator[ScalarField]:
        return iter(self._parts)

    def pointwise_norm(self) -> np.ndarray:
        """Euclidean norm of the vector at each grid point"""
        return np.sqrt(np.sum(self._values**2, axis=0))

    def norm(self, p: float = 2) -> float:
        """L^p norm of the pointwise Euclidean norm, p in {2, inf}"""
        if p == 2:
            return float(np.sqrt(sum(part.norm(2)**2 for part in self._parts)))
        if p == np.inf:
            return float(np.max(self.pointwise_norm()))
        raise PreconditionError(f"only p in {{2, inf}} is supported, got {p}")

    def __repr__(self):
        return f"VectorField(dim={self.grid.dim}, M={self.grid.points}, components={self.components})"


class Trajectory():
    """Time-sampled sequence of scalar fields on one grid

    Args:
        times (:class:`Sequence[float]`): strictly increasing sample times
        snapshots (:class:`Sequence[ScalarField]`): one field per time
        metadata (:class:`dict`, optional): run parameters (tau, gamma, rho_bar, ...)
    """

    def __init__(self, times: Sequence[float], snapshots: Sequence[ScalarField], metadata: Optional[Dict] = None):
        times = np.asarray(times, dtype=float)
        if len(times) != len(snapshots):
            raise PreconditionError(f"{len(times)} times for {len(snapshots)} snapshots")
        if len(times) == 0:
            raise PreconditionError("a trajectory needs at least one snapshot")
        if np.any(np.diff(times) <= 0):
            raise PreconditionError("sample times must be strictly increasing")
        grid = snapshots[0].grid
        if any(snapshot.grid != grid for snapshot in snapshots):
            raise PreconditionError("all snapshots must share one grid")
        self.times = times
        self.times.setflags(write=False)
        self.snapshots: List[ScalarField] = list(snapshots)
        self.metadata = dict(metadata or {})

    @property
    def grid(self) -> PeriodicGrid:
        """:class:`PeriodicGrid`: grid shared by the snapshots"""
        return self.snapshots[0].grid

    def __len__(self) -> int:
        return len(self.snapshots)

    def map(self, func, **metadata):
        """Applies a field-to-field function to every snapshot

        Args:
            func (Callable[[ScalarField], ScalarField]): transformation
            metadata: extra metadata entries for the new trajectory

        Returns:
            Trajectory: transformed trajectory on the same times
        """
        return Trajectory(self.times, [func(snapshot) for snapshot in self.snapshots], {**self.metadata, **metadata})

    def rescaled(self, factor: float):
        """Same snapshots with times multiplied by factor (slow to fast time: 1/tau)"""
        return Trajectory(self.times * factor, self.snapshots, self.metadata)

    def at(self, time: float, atol: float = 1e-12) -> ScalarField:
        """Snapshot sampled at the given time

        Args:
            time (float): requested time
            atol (float, optional): matching tolerance. Defaults to 1e-12.

        Returns:
            ScalarField: the snapshot
        """
        matches = np.flatnonzero(np.abs(self.times - time) <= atol * max(1.0, abs(time)))
        if len(matches) == 0:
            raise PreconditionError(f"no snapshot at time {time}")
        return self.snapshots[int(matches[0])]
