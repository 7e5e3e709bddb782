"""Test the entropy variables, the symmetric form and the compensating matrix"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from modules.debug.errors import ConfigurationError, DomainError
from modules.experiments.verify import sk_verify
from modules.physics.symmetry import (PressureLaw, compensating_matrix, conservative_to_entropy, entropy_and_flux,
                                      entropy_arrays, entropy_to_conservative, from_entropy_vars, linearized_source,
                                      matrices_at, reference_matrices, sk_identity_check, symmetric_form_residual,
                                      to_entropy_vars)
from modules.spectral.grid import ScalarField, VectorField

gammas = st.sampled_from([1.0, 1.4, 2.0, 3.0])
densities = st.floats(min_value=0.2, max_value=5.0)
momenta = st.floats(min_value=-3.0, max_value=3.0)


class TestEntropyVariables:

    def test_examples(self, expected):
        """Tests the entropy variables of the worked examples
        """
        for gamma, rho, m, w1, w2 in expected['entropy_variables']:
            left, right = conservative_to_entropy(np.array(rho), np.array([m]), PressureLaw(gamma))
            assert float(left) == pytest.approx(w1, abs=1e-14)
            assert float(right[0]) == pytest.approx(w2, abs=1e-14)

    def test_isothermal_inverse(self, expected):
        """Tests the isothermal inverse map
        """
        example = expected['isothermal_inverse']
        rho, m = entropy_to_conservative(np.array(example['w1']), np.zeros(1), PressureLaw(1.0))
        assert float(rho) == pytest.approx(example['rho'], rel=1e-14)
        assert float(m[0]) == 0

    @settings(max_examples=60, deadline=None)
    @given(gamma=gammas, rho=densities, m1=momenta, m2=momenta)
    def test_round_trip(self, gamma, rho, m1, m2):
        """Tests that the entropy map and its inverse compose to the identity
        """
        law = PressureLaw(gamma)
        m = np.array([m1, m2])
        w1, w2 = conservative_to_entropy(np.array(rho), m, law)
        back_rho, back_m = entropy_to_conservative(w1, w2, law)
        assert float(back_rho) == pytest.approx(rho, rel=1e-10)
        assert np.allclose(back_m, m, rtol=1e-10, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(gamma=gammas, rho=densities)
    def test_closed_forms(self, gamma, rho):
        """Tests h' and its inverse against quadrature and bracketed root finding
        """
        law = PressureLaw(gamma)
        value = float(law.h_prime(rho))
        assert law.h_prime_quadrature(rho) == pytest.approx(value, rel=1e-10, abs=1e-12)
        assert law.h_prime_inverse_bracketed(value) == pytest.approx(float(law.h_prime_inverse(value)), rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(gamma=gammas, rho=densities, m=momenta)
    def test_gradient_of_entropy(self, gamma, rho, m):
        """Tests that W is the gradient of eta = m^2 / (2 rho) + h(rho)
        """
        law = PressureLaw(gamma)
        step = 1e-6

        def eta(r, p):
            return p**2 / (2 * r) + float(law.h(r))

        d_rho = (eta(rho + step, m) - eta(rho - step, m)) / (2 * step)
        d_m = (eta(rho, m + step) - eta(rho, m - step)) / (2 * step)
        w1, w2 = conservative_to_entropy(np.array(rho), np.array([m]), law)
        assert d_rho == pytest.approx(float(w1), rel=1e-6, abs=1e-6)
        assert d_m == pytest.approx(float(w2[0]), rel=1e-6, abs=1e-6)

    def test_vacuum(self):
        """Tests that a vacuum state is a domain error naming the grid point
        """
        with pytest.raises(DomainError) as info:
            conservative_to_entropy(np.array([1.0, 0.0, 2.0]), np.zeros((1, 3)), PressureLaw(2.0))
        assert info.value.index == (1, )
        with pytest.raises(DomainError):
            entropy_to_conservative(np.array([-3.0]), np.zeros((1, 1)), PressureLaw(2.0))

    def test_invalid_gamma(self):
        """Tests that gamma below one is a configuration error
        """
        with pytest.raises(ConfigurationError):
            PressureLaw(0.5)

    def test_fields(self, small_grid):
        """Tests the field level maps and the perturbation from the reference state
        """
        x = small_grid.coordinates()[0]
        rho = ScalarField(small_grid, 1 + 0.1 * np.sin(x))
        m = VectorField(small_grid, [0.05 * np.cos(x)])
        state = to_entropy_vars(rho, m, PressureLaw(2.0))
        back_rho, back_m = from_entropy_vars(state)
        assert np.allclose(back_rho.values, rho.values, atol=1e-13)
        assert np.allclose(back_m.values, m.values, atol=1e-13)
        assert state.perturbation().components == 2
        assert state.reference[0] == 0


class TestMatrices:

    def test_reference(self, expected):
        """Tests A0, A1 and H at the reference state
        """
        family = reference_matrices(PressureLaw(2.0), 1.0, 1)
        example = expected['reference_matrices']
        assert np.allclose(family.a0, example['a0'], atol=1e-15)
        assert np.allclose(family.a[0], example['a1'], atol=1e-15)
        assert np.allclose(family.source, example['source'], atol=1e-15)
        assert family.is_positive_definite()

    @settings(max_examples=40, deadline=None)
    @given(gamma=gammas, rho=densities, v1=momenta, v2=momenta)
    def test_symmetric(self, gamma, rho, v1, v2):
        """Tests that A0 and Aj are symmetric and A0 positive definite away from vacuum
        """
        law = PressureLaw(gamma)
        w = [float(law.h_prime(rho)) - 0.5 * (v1**2 + v2**2), v1, v2]
        family = matrices_at(w, law)
        assert np.array_equal(family.a0, family.a0.T)
        for matrix in family.a:
            assert np.array_equal(matrix, matrix.T)
        assert family.rho == pytest.approx(rho, rel=1e-10)
        assert family.is_positive_definite()
        first, second = family.a0_split
        assert np.allclose(first + second, family.a0, atol=0)

    def test_eigenvalues(self):
        """Tests the spectrum of A0 at rest
        """
        law = PressureLaw(1.4)
        family = reference_matrices(law, 2.0, 3)
        eigenvalues = np.sort(np.linalg.eigvalsh(family.a0))
        assert eigenvalues[0] == pytest.approx(1.0, rel=1e-14)
        assert np.allclose(eigenvalues[1:], float(law.dp(2.0)), rtol=1e-14)

    def test_source(self):
        """Tests that the relaxation source damps W2
        """
        law = PressureLaw(2.0)
        family = matrices_at([float(law.h_prime(1.0)) - 0.5, 1.0], law, tau=0.5, rho=1.0)
        assert family.source[0] == 0
        assert family.source[1] == pytest.approx(-float(law.dp(1.0)) / 0.5)


class TestCompensatingMatrix:

    def test_one_dimensional_product(self, expected):
        """Tests K(1) A1 at the reference state
        """
        law = PressureLaw(2.0)
        comp = compensating_matrix([1.0], law)
        product = comp.matrix @ reference_matrices(law, 1.0, 1).a[0]
        assert np.allclose(product, expected['sk_product'], atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(gamma=gammas,
           xi=st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=4).filter(
               lambda v: np.linalg.norm(v) > 1e-3))
    def test_identities(self, gamma, xi):
        """Tests the skew symmetry of K A0 and the dissipative form of K A(xi)
        """
        assert sk_identity_check(xi, PressureLaw(gamma)).passed

    @settings(max_examples=30, deadline=None)
    @given(xi=st.lists(st.floats(min_value=-10, max_value=10), min_size=2, max_size=2).filter(
        lambda v: np.linalg.norm(v) > 1e-3),
           scale=st.floats(min_value=0.1, max_value=100))
    def test_homogeneity(self, xi, scale):
        """Tests that K depends on xi through its direction only
        """
        law = PressureLaw(2.0)
        first = compensating_matrix(xi, law).matrix
        second = compensating_matrix(np.asarray(xi) * scale, law).matrix
        assert np.allclose(first, second, atol=1e-14)

    def test_zero_direction(self):
        """Tests that xi = 0 is a domain error
        """
        with pytest.raises(DomainError):
            compensating_matrix([0.0, 0.0], PressureLaw(2.0))

    def test_sk_verify(self):
        """Tests the sk-verify suite over dimensions and exponents
        """
        reports = sk_verify([1, 2, 3], [1.0, 2.0], directions=20, seed=5)
        assert len(reports) == 6
        assert all(report.passed for report in reports)


class TestSymmetricForm:

    def _state(self, grid, tau):
        x = grid.coordinates()[0]
        law = PressureLaw(2.0)
        rho = ScalarField(grid, 1 + 0.1 * np.sin(x))
        m = VectorField(grid, [0.05 * np.cos(x)])
        # Euler in fast time: rho_t = -div m, m_t = -div(m^2 / rho + p) - m / tau
        rho_t = m[0].derivative([1]) * -1.0
        flux = ScalarField(grid, m.values[0]**2 / rho.values + law.pressure(rho.values))
        m_t = VectorField(grid, [-flux.derivative([1]).values - m.values[0] / tau])
        return rho, m, rho_t, m_t, law

    def test_residual(self, small_grid):
        """Tests that a solution of the conservative system satisfies the symmetric form
        """
        rho, m, rho_t, m_t, law = self._state(small_grid, 0.5)
        report = symmetric_form_residual(rho, m, rho_t, m_t, law, tau=0.5)
        assert report.value["relative_residual"] < 1e-10

    def test_entropy_flux(self, small_grid):
        """Tests that the relative entropy vanishes at the reference state
        """
        rho = ScalarField.constant(small_grid, 1.0)
        m = VectorField.zeros(small_grid, 1)
        pair = entropy_and_flux(rho, m, PressureLaw(2.0))
        assert pair.relative.norm(np.inf) == 0
        assert pair.relative_flux.norm(np.inf) == 0

    def test_relative_entropy_expansion(self, small_grid):
        """Tests that with gamma = 2 the relative entropy of rho = 1 + eps at rest is eps^2
        """
        law = PressureLaw(2.0)
        for eps in (0.1, 1e-2, 1e-3, -1e-2):
            rho = ScalarField.constant(small_grid, 1.0 + eps)
            pair = entropy_and_flux(rho, VectorField.zeros(small_grid, 1), law)
            assert np.allclose(pair.relative.values, eps**2, rtol=1e-8, atol=0)

    @settings(max_examples=80, deadline=None)
    @given(gamma=gammas, rho=densities, m1=momenta, m2=momenta)
    def test_relative_entropy_sign(self, gamma, rho, m1, m2):
        """Tests that the relative entropy is nonnegative and vanishes only at the constant state at rest
        """
        _, _, relative, _ = entropy_arrays(np.array(rho), np.array([m1, m2]), PressureLaw(gamma))
        assert float(relative) >= -1e-12
        if abs(rho - 1) > 1e-3 or abs(m1) > 1e-3 or abs(m2) > 1e-3:
            assert float(relative) > 0

    def test_linearized_source(self, small_grid):
        """Tests the split of the source into the linear damping and the remainder
        """
        rho, m, _, _, law = self._state(small_grid, 0.5)
        state = to_entropy_vars(rho, m, law)
        linear, rest = linearized_source(state, tau=0.5)
        assert linear.components == rest.components == 2
        assert linear[0].norm(np.inf) == 0
        assert np.allclose(linear[1].values, float(law.dp(1.0)) * state.w2[0].values / 0.5)
        assert rest.norm(np.inf) < linear.norm(np.inf)
