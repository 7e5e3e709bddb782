"""Entropy, entropy variables and the symmetric form of the damped isentropic Euler system.

For p(rho) = rho^gamma the entropy is eta(rho, m) = |m|^2 / (2 rho) + h(rho) with
h'(rho) = int_1^rho p'(s) / s ds and h(1) = 0. Its gradient W = (W1, W2) turns the system into
A0(W) W_t + sum_j Aj(W) d_j W = H(W) with symmetric A0, Aj.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import numpy as np
from scipy import integrate, linalg, optimize
from modules.data.report import Report
from modules.debug.errors import ConfigurationError, DomainError, PreconditionError
from modules.spectral.grid import ScalarField, VectorField

logger = logging.getLogger(__name__)

VACUUM_GUARD = 1e-10
BRACKET = (1e-8, 1e8)
SK_TOLERANCE = 1e-13


def check_density(rho: np.ndarray, what: str = "density"):
    """Raises a DomainError naming the first grid point where rho <= 1e-10 or is not finite"""
    rho = np.asarray(rho)
    bad = ~(rho > VACUUM_GUARD)
    if np.any(bad):
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DomainError(f"{what} {rho[index]!r} below the vacuum guard {VACUUM_GUARD}", index)


@dataclass(frozen=True)
class PressureLaw:
    """Pressure law p(rho) = rho^gamma and the enthalpy-like potential h

    Args:
        gamma (:class:`float`): adiabatic exponent, at least 1
    """
    gamma: float = 2.0

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ConfigurationError(f"gamma must be >= 1, got {self.gamma}", "law.gamma")

    @property
    def isothermal(self) -> bool:
        """:class:`bool`: whether gamma = 1"""
        return self.gamma == 1

    def pressure(self, rho):
        """p(rho)"""
        return np.asarray(rho, dtype=float)**self.gamma

    def dp(self, rho):
        """p'(rho)"""
        return self.gamma * np.asarray(rho, dtype=float)**(self.gamma - 1)

    def d2p(self, rho):
        """p''(rho)"""
        return self.gamma * (self.gamma - 1) * np.asarray(rho, dtype=float)**(self.gamma - 2)

    def h_prime(self, rho):
        """h'(rho) in closed form"""
        rho = np.asarray(rho, dtype=float)
        if self.isothermal:
            return np.log(rho)
        return self.gamma / (self.gamma - 1) * (rho**(self.gamma - 1) - 1)

    def h_second(self, rho):
        """h''(rho) = p'(rho) / rho"""
        return self.dp(rho) / np.asarray(rho, dtype=float)

    def h(self, rho):
        """h(rho), normalised by h(1) = 0"""
        rho = np.asarray(rho, dtype=float)
        if self.isothermal:
            return rho * np.log(rho) - rho + 1
        g = self.gamma
        return (rho**g - 1) / (g - 1) - g * (rho - 1) / (g - 1)

    @property
    def h_prime_infimum(self) -> float:
        """:class:`float`: lower end of the range of h'"""
        return -np.inf if self.isothermal else -self.gamma / (self.gamma - 1)

    def h_prime_inverse(self, value):
        """Density with h'(rho) = value, in closed form

        Raises:
            DomainError: value outside the range of h' or a density below the vacuum guard
        """
        value = np.asarray(value, dtype=float)
        if self.isothermal:
            rho = np.exp(value)
        else:
            base = 1 + (self.gamma - 1) * value / self.gamma
            outside = ~(base > 0)
            if np.any(outside):
                index = tuple(int(i) for i in np.argwhere(np.atleast_1d(outside))[0])
                raise DomainError(f"h' argument below {self.h_prime_infimum:.6g} (vacuum breach)", index)
            rho = base**(1 / (self.gamma - 1))
        check_density(rho)
        return rho

    def h_prime_quadrature(self, rho: float) -> float:
        """h'(rho) by adaptive quadrature of p'(s) / s on [1, rho]"""
        value, _ = integrate.quad(lambda s: float(self.dp(s)) / s, 1.0, float(rho), epsabs=1e-14, epsrel=1e-13)
        return value

    def h_prime_inverse_bracketed(self, value: float) -> float:
        """Root of h'(rho) = value bracketed on [1e-8, 1e8], usable for any increasing h'"""
        low, high = BRACKET
        func = lambda rho: float(self.h_prime(rho)) - value
        if func(low) > 0 or func(high) < 0:
            raise DomainError(f"h'(rho) = {value} has no root in {BRACKET}")
        return optimize.brentq(func, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def conservative_to_entropy(rho: np.ndarray, m: np.ndarray, law: PressureLaw) -> Tuple[np.ndarray, np.ndarray]:
    """W1 = h'(rho) - |m|^2 / (2 rho^2), W2 = m / rho on arrays

    Args:
        rho (np.ndarray): densities
        m (np.ndarray): momenta, component axis first
        law (PressureLaw): pressure law

    Returns:
        Tuple[np.ndarray, np.ndarray]: W1 and W2
    """
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    check_density(rho)
    w2 = m / rho
    return law.h_prime(rho) - 0.5 * np.sum(w2**2, axis=0), w2


def entropy_to_conservative(w1: np.ndarray, w2: np.ndarray, law: PressureLaw) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`conservative_to_entropy`: rho = (h')^-1(W1 + |W2|^2 / 2), m = rho W2"""
    w2 = np.asarray(w2, dtype=float)
    rho = law.h_prime_inverse(np.asarray(w1, dtype=float) + 0.5 * np.sum(w2**2, axis=0))
    return rho, rho * w2


@dataclass
class EntropyState:
    """Entropy variables on a grid

    Args:
        w1 (:class:`ScalarField`): W1
        w2 (:class:`VectorField`): W2, N components
        law (:class:`PressureLaw`): pressure law
        rho_bar (:class:`float`): background density
    """
    w1: ScalarField
    w2: VectorField
    law: PressureLaw
    rho_bar: float = 1.0

    @property
    def reference(self) -> np.ndarray:
        """:class:`numpy.ndarray`: W-bar = (h'(rho_bar), 0, ..., 0)"""
        out = np.zeros(self.w2.components + 1)
        out[0] = float(self.law.h_prime(self.rho_bar))
        return out

    def stacked(self) -> VectorField:
        """W as one field with N + 1 components"""
        return VectorField(self.w1.grid, np.concatenate([self.w1.values[None], self.w2.values]))

    def perturbation(self) -> VectorField:
        """W - W-bar with N + 1 components"""
        values = self.stacked().values - self.reference.reshape((-1, ) + (1, ) * self.w1.grid.dim)
        return VectorField(self.w1.grid, values)


def to_entropy_vars(rho: ScalarField, m: VectorField, law: PressureLaw, rho_bar: float = 1.0) -> EntropyState:
    """Entropy variables of a density and momentum field

    Raises:
        DomainError: nonpositive density, naming the grid point

    Returns:
        EntropyState: W1, W2 on the same grid
    """
    w1, w2 = conservative_to_entropy(rho.values, m.values, law)
    return EntropyState(ScalarField(rho.grid, w1), VectorField(rho.grid, w2), law, rho_bar)


def from_entropy_vars(state: EntropyState) -> Tuple[ScalarField, VectorField]:
    """Density and momentum of a state of entropy variables

    Raises:
        DomainError: W1 + |W2|^2 / 2 outside the range of h' (vacuum breach)

    Returns:
        Tuple[ScalarField, VectorField]: rho and m
    """
    rho, m = entropy_to_conservative(state.w1.values, state.w2.values, state.law)
    grid = state.w1.grid
    return ScalarField(grid, rho), VectorField(grid, m)


def _matrix_batch(w2: np.ndarray, pprime: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], np.ndarray, List[np.ndarray]]:
    """A0, Aj and their first parts A0_I, Aj_I for P points.
    w2 has shape (P, N), pprime shape (P,); matrices have shape (P, N+1, N+1)"""
    points, dim = w2.shape
    size = dim + 1
    eye = np.eye(dim)
    outer = np.einsum('pi,pk->pik', w2, w2)
    a0_first = np.zeros((points, size, size))
    a0_first[:, 0, 0] = 1
    a0_first[:, 0, 1:] = w2
    a0_first[:, 1:, 0] = w2
    a0_first[:, 1:, 1:] = outer
    a0 = a0_first.copy()
    a0[:, 1:, 1:] += pprime[:, None, None] * eye
    aj, aj_first = [], []
    for j in range(dim):
        w2j = w2[:, j]
        first = a0_first * w2j[:, None, None]
        full = first.copy()
        full[:, 0, 1 + j] += pprime
        full[:, 1 + j, 0] += pprime
        e_j = eye[j]
        cross = np.einsum('pi,k->pik', w2, e_j) + np.einsum('i,pk->pik', e_j, w2)
        full[:, 1:, 1:] += pprime[:, None, None] * (w2j[:, None, None] * eye + cross)
        aj.append(full)
        aj_first.append(first)
    return a0, aj, a0_first, aj_first


@dataclass
class MatrixFamily:
    """Coefficients of the symmetric form at one state point

    Args:
        a0 (:class:`numpy.ndarray`): A0, (N+1) x (N+1)
        a0_split (:class:`tuple`): (A0_I, A0_II)
        a (:class:`list`): A1..AN
        a_split (:class:`list`): (Aj_I, Aj_II) per direction
        source (:class:`numpy.ndarray`): H(W) = p'(rho) (0, -W2 / tau)
        rho (:class:`float`): density of the state
    """
    a0: np.ndarray
    a0_split: Tuple[np.ndarray, np.ndarray]
    a: List[np.ndarray]
    a_split: List[Tuple[np.ndarray, np.ndarray]]
    source: np.ndarray
    rho: float

    @property
    def symbol(self):
        """Callable xi -> sum_j xi_j Aj"""
        return lambda xi: sum(x * matrix for x, matrix in zip(xi, self.a))

    def is_positive_definite(self) -> bool:
        """Whether A0 admits a Cholesky factorisation"""
        try:
            linalg.cholesky(self.a0, lower=True)
        except linalg.LinAlgError:
            return False
        return True


def matrices_at(w: Sequence[float], law: PressureLaw, tau: float = 1.0, rho: Optional[float] = None) -> MatrixFamily:
    """Matrices of the symmetric form at the state point W = (W1, W2)

    Args:
        w (Sequence[float]): W1 followed by the N entries of W2
        law (PressureLaw): pressure law
        tau (float, optional): relaxation time. Defaults to 1.0.
        rho (float, optional): density of the state when known exactly; recovered from W otherwise

    Raises:
        DomainError: vacuum breach

    Returns:
        MatrixFamily: A0, Aj, H and the splits
    """
    w = np.asarray(w, dtype=float)
    w2 = w[1:]
    if rho is None:
        rho = float(law.h_prime_inverse(w[0] + 0.5 * np.dot(w2, w2)))
    check_density(rho)
    pprime = np.array([float(law.dp(rho))])
    a0, aj, a0_first, aj_first = _matrix_batch(w2[None, :], pprime)
    source = np.concatenate([[0.0], -pprime[0] * w2 / tau])
    return MatrixFamily(a0[0], (a0_first[0], a0[0] - a0_first[0]), [m[0] for m in aj],
                        [(f[0], m[0] - f[0]) for f, m in zip(aj_first, aj)], source, rho)


def reference_matrices(law: PressureLaw, rho_bar: float, dim: int, tau: float = 1.0) -> MatrixFamily:
    """Matrices at the constant state W-bar = (h'(rho_bar), 0)"""
    w = np.zeros(dim + 1)
    w[0] = float(law.h_prime(rho_bar))
    return matrices_at(w, law, tau, rho=rho_bar)


@dataclass
class CompensatingMatrix:
    """Compensating matrix K(xi) = (0, xi^T / (|xi| p'(rho_bar)); -xi / |xi|, 0)

    Args:
        direction (:class:`numpy.ndarray`): xi / |xi|
        matrix (:class:`numpy.ndarray`): K, (N+1) x (N+1)
    """
    direction: np.ndarray
    matrix: np.ndarray


def compensating_matrix(xi: Sequence[float], law: PressureLaw, rho_bar: float = 1.0) -> CompensatingMatrix:
    """Builds K(xi); it depends on xi only through its direction

    Raises:
        DomainError: xi = 0

    Returns:
        CompensatingMatrix: direction and matrix
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    size = float(np.linalg.norm(xi))
    if size == 0:
        raise DomainError("the compensating matrix needs a nonzero direction")
    direction = xi / size
    dim = xi.size
    matrix = np.zeros((dim + 1, dim + 1))
    matrix[0, 1:] = direction / float(law.dp(rho_bar))
    matrix[1:, 0] = -direction
    return CompensatingMatrix(direction, matrix)


def sk_identity_check(xi: Sequence[float], law: PressureLaw, rho_bar: float = 1.0) -> Report:
    """Residuals of the compensating identities at W-bar:
    K A0 is skew-symmetric and K sum_j xi_j Aj = (|xi|, 0; 0, -p'(rho_bar) xi (x) xi / |xi|)

    Returns:
        Report: value holds skew_residual and sk_residual (max norms), passed when both are below 1e-13
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    comp = compensating_matrix(xi, law, rho_bar)
    family = reference_matrices(law, rho_bar, xi.size)
    product_0 = comp.matrix @ family.a0
    skew = float(np.max(np.abs(product_0 + product_0.T)))
    size = float(np.linalg.norm(xi))
    expected = np.zeros_like(product_0)
    expected[0, 0] = size
    expected[1:, 1:] = -float(law.dp(rho_bar)) * np.outer(xi, xi) / size
    sk = float(np.max(np.abs(comp.matrix @ family.symbol(xi) - expected)))
    value = {"N": xi.size, "gamma": law.gamma, "rho_bar": rho_bar, "xi": xi, "skew_residual": skew, "sk_residual": sk}
    return Report("sk_identity_check", {"N": xi.size, "gamma": law.gamma, "rho_bar": rho_bar}, value,
                  passed=bool(skew < SK_TOLERANCE and sk < SK_TOLERANCE))


@dataclass
class EntropyFlux:
    """Entropy, entropy flux and their versions relative to (rho_bar, 0)

    Args:
        eta (:class:`ScalarField`): eta = |m|^2 / (2 rho) + h(rho)
        flux (:class:`VectorField`): q = (|m|^2 / (2 rho) + rho h'(rho)) m / rho
        relative (:class:`ScalarField`): eta - eta(rho_bar, 0) - h'(rho_bar) (rho - rho_bar)
        relative_flux (:class:`VectorField`): q - h'(rho_bar) m
    """
    eta: ScalarField
    flux: VectorField
    relative: ScalarField
    relative_flux: VectorField


def entropy_arrays(rho: np.ndarray, m: np.ndarray, law: PressureLaw, rho_bar: float = 1.0):
    """Pointwise eta, q, relative eta and relative q on arrays (momentum component axis first)"""
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    check_density(rho)
    kinetic = 0.5 * np.sum(m**2, axis=0) / rho
    eta = kinetic + law.h(rho)
    flux = (kinetic + rho * law.h_prime(rho)) * m / rho
    slope = float(law.h_prime(rho_bar))
    relative = eta - float(law.h(rho_bar)) - slope * (rho - rho_bar)
    return eta, flux, relative, flux - slope * m


def entropy_and_flux(rho: ScalarField, m: VectorField, law: PressureLaw, rho_bar: float = 1.0) -> EntropyFlux:
    """Entropy pair of a density and momentum field

    Raises:
        DomainError: vacuum breach

    Returns:
        EntropyFlux: the four fields
    """
    eta, flux, relative, relative_flux = entropy_arrays(rho.values, m.values, law, rho_bar)
    grid = rho.grid
    return EntropyFlux(ScalarField(grid, eta), VectorField(grid, flux), ScalarField(grid, relative),
                       VectorField(grid, relative_flux))


def _flatten(state: EntropyState):
    grid = state.w1.grid
    rho, _ = entropy_to_conservative(state.w1.values, state.w2.values, state.law)
    w2 = state.w2.values.reshape(state.w2.components, -1).T
    gradients = np.stack([part.gradient().values for part in state.stacked()])  # (n, N, *pts)
    grad = gradients.reshape(gradients.shape[0], grid.dim, -1).transpose(2, 1, 0)  # (P, N, n)
    return rho.reshape(-1), w2, grad


def symmetric_form_residual(rho: ScalarField, m: VectorField, rho_t: ScalarField, m_t: VectorField,
                            law: PressureLaw, tau: float = 1.0) -> Report:
    """Residual of A0(W) W_t + sum_j Aj(W) d_j W - H(W) for a state and its time derivative in
    conservative variables. W_t follows from the chain rule, d_j W is spectral

    Args:
        rho (ScalarField): density
        m (VectorField): momentum
        rho_t (ScalarField): time derivative of the density
        m_t (VectorField): time derivative of the momentum
        law (PressureLaw): pressure law
        tau (float, optional): relaxation time. Defaults to 1.0.

    Returns:
        Report: max residual, and the same relative to the largest term
    """
    state = to_entropy_vars(rho, m, law)
    rho_flat, w2, grad = _flatten(state)
    dim = w2.shape[1]
    m_flat = m.values.reshape(dim, -1).T
    rho_t_flat = rho_t.values.reshape(-1)
    m_t_flat = m_t.values.reshape(dim, -1).T
    # W_t = dW/dU U_t
    w1_t = (law.h_second(rho_flat) + np.sum(m_flat**2, axis=1) / rho_flat**3) * rho_t_flat \
        - np.sum(m_flat * m_t_flat, axis=1) / rho_flat**2
    w2_t = -m_flat * (rho_t_flat / rho_flat**2)[:, None] + m_t_flat / rho_flat[:, None]
    w_t = np.concatenate([w1_t[:, None], w2_t], axis=1)
    pprime = law.dp(rho_flat)
    a0, aj, _, _ = _matrix_batch(w2, pprime)
    time_part = np.einsum('pik,pk->pi', a0, w_t)
    space_part = sum(np.einsum('pik,pk->pi', aj[j], grad[:, j, :]) for j in range(dim))
    source = np.concatenate([np.zeros((w2.shape[0], 1)), -pprime[:, None] * w2 / tau], axis=1)
    residual = time_part + space_part - source
    scale = max(np.max(np.abs(time_part)), np.max(np.abs(space_part)), np.max(np.abs(source)), np.finfo(float).tiny)
    worst = float(np.max(np.abs(residual)))
    return Report("symmetric_form_residual", {"gamma": law.gamma, "tau": tau}, {
        "max_residual": worst,
        "relative_residual": worst / scale
    })


def linearized_source(state: EntropyState, tau: float = 1.0) -> Tuple[VectorField, VectorField]:
    """Linear damping L W = (0, p'(rho_bar) W2 / tau) and the remainder G of the linearisation about W-bar,
    so that A0(W-bar) W_t + sum_j Aj(W-bar) d_j W = -L W + G along solutions

    Args:
        state (EntropyState): entropy variables
        tau (float, optional): relaxation time. Defaults to 1.0.

    Returns:
        Tuple[VectorField, VectorField]: L W and G, N + 1 components each
    """
    if tau <= 0:
        raise PreconditionError(f"tau must be positive, got {tau}")
    grid = state.w1.grid
    law = state.law
    rho, w2, grad = _flatten(state)
    points, dim = w2.shape
    pprime = law.dp(rho)
    bar = reference_matrices(law, state.rho_bar, dim, tau)
    bar_p = float(law.dp(state.rho_bar))
    a0, aj, _, _ = _matrix_batch(w2, pprime)
    a0_inv = np.linalg.inv(a0)
    a0_bar_inv = np.linalg.inv(bar.a0)
    remainder = np.zeros((points, dim + 1))
    for j in range(dim):
        difference = np.einsum('pik,pkl->pil', a0_inv, aj[j]) - a0_bar_inv @ bar.a[j]
        remainder -= np.einsum('ik,pkl,pl->pi', bar.a0, difference, grad[:, j, :])
    damped = np.concatenate([np.zeros((points, 1)), w2], axis=1)
    difference = pprime[:, None, None] * a0_inv - bar_p * a0_bar_inv
    remainder -= np.einsum('ik,pkl,pl->pi', bar.a0, difference, damped) / tau
    linear = bar_p * damped / tau
    shape = (dim + 1, ) + grid.shape
    return VectorField(grid, linear.T.reshape(shape)), VectorField(grid, remainder.T.reshape(shape))
