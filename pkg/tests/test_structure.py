import numpy as np
import pytest

from nvne.deformation import CoefficientSeries, PowerLaw
from nvne.errors import DomainError, GradientFailure, ZeroTrace
from nvne.hermitian import (
    SIGMA_X,
    SIGMA_Z,
    pure_state,
    random_density_matrix,
    random_hermitian,
    validate_density,
)
from nvne.structure import (
    casimir,
    casimir_functional,
    effective_hamiltonian,
    finite_difference_gradient,
    generator,
    hamiltonian_function,
    poisson_bracket,
    q_average,
    q_average_functional,
    trace_polynomial_functional,
    ObservableFunctional,
)

from conftest import make_states


def comm(a, b):
    return a @ b - b @ a


class TestHamiltonianFunction:
    def test_q2_oracle(self):
        rho = validate_density(np.diag([0.75, 0.25]).astype(complex))
        assert hamiltonian_function(rho, -SIGMA_Z, PowerLaw(q=2.0)) == pytest.approx(-0.5)

    def test_pure_state_reduces_to_linear_average(self, rng):
        # tolerance 1e-7: eigh leaves ~1e-16 noise in the kernel eigenvalues
        # of an outer-product state, which x**0.5 amplifies to ~1e-8
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        rho = pure_state(psi)
        h = random_hermitian(3, rng)
        expected = float(np.real(np.trace(rho.matrix @ h)))
        for q in (0.5, 2.0, 3.0):
            assert hamiltonian_function(rho, h, PowerLaw(q=q)) == pytest.approx(expected, abs=1e-7)

    def test_maximally_mixed_traceless_field(self):
        rho = validate_density(0.5 * np.eye(2, dtype=complex))
        for q in (0.5, 2.0, 3.0):
            assert hamiltonian_function(rho, -SIGMA_Z, PowerLaw(q=q)) == pytest.approx(0.0, abs=1e-14)

    def test_one_homogeneity(self, rng):
        h = random_hermitian(3, rng)
        f = PowerLaw(q=2.5)
        rho = random_density_matrix(3, rng)
        base = hamiltonian_function(rho.matrix, h, f)
        for c in (0.5, 2.0, 3.0):
            scaled = hamiltonian_function(c * rho.matrix, h, f)
            assert scaled == pytest.approx(c * base, rel=1e-10)

    def test_zero_trace_rejected(self, rng):
        with pytest.raises(ZeroTrace):
            hamiltonian_function(np.zeros((2, 2), dtype=complex), SIGMA_Z, PowerLaw(q=2.0))


class TestEffectiveHamiltonian:
    def test_q1_returns_field(self, rng):
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        heff = effective_hamiltonian(rho, h, PowerLaw(q=1.0))
        # for f = id the scalar terms cancel exactly
        assert np.allclose(heff, h, atol=1e-12)

    def test_spin_sigma_z_coefficient(self):
        # diag(lam, 1-lam), H = -mu sigma_z: the sigma_z coefficient of the
        # variational derivative is -mu*q*(lam^(q-1) + (1-lam)^(q-1))/2.
        # (The q=2 case collapses to -mu sigma_z with no identity part.)
        mu, lam = 1.0, 0.75
        rho = validate_density(np.diag([lam, 1 - lam]).astype(complex))
        for q in (1.5, 2.0, 3.0):
            heff = effective_hamiltonian(rho, -mu * SIGMA_Z, PowerLaw(q=q))
            gamma = 0.5 * (heff[1, 1] - heff[0, 0]).real
            expected = mu * q * (lam ** (q - 1) + (1 - lam) ** (q - 1)) / 2
            assert gamma == pytest.approx(expected, abs=1e-12)
            offdiag = heff - np.diag(np.diag(heff))
            assert np.linalg.norm(offdiag) < 1e-14

    def test_q2_spin_case_is_field_itself(self):
        rho = validate_density(np.diag([0.75, 0.25]).astype(complex))
        heff = effective_hamiltonian(rho, -SIGMA_Z, PowerLaw(q=2.0))
        assert np.allclose(heff, -SIGMA_Z, atol=1e-13)

    def test_energy_identity(self, rng):
        # 108 random (rho, H, q) triples
        for q in (1.0, 1.5, 2.0, 3.0):
            f = PowerLaw(q=q)
            for rho in make_states(rng, dims=(2, 3, 4), per_dim=9):
                h = random_hermitian(rho.dim, rng)
                heff = effective_hamiltonian(rho, h, f)
                lhs = float(np.real(np.trace(rho.matrix @ heff)))
                rhs = hamiltonian_function(rho, h, f)
                assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_zero_eigenvalue_small_q_rejected(self):
        rho = validate_density(np.diag([1.0, 0.0]).astype(complex))
        with pytest.raises(DomainError):
            effective_hamiltonian(rho, SIGMA_Z, PowerLaw(q=0.5))

    def test_commutator_matches_generator(self, rng):
        f = PowerLaw(q=2.5)
        for rho in make_states(rng, dims=(3,), per_dim=3):
            h = random_hermitian(3, rng)
            heff = effective_hamiltonian(rho, h, f)
            g = generator(rho, h, f)
            lhs = comm(heff, rho.matrix)
            rhs = comm(g, rho.matrix)
            assert np.linalg.norm(lhs - rhs) < 1e-12

    def test_differs_from_generator_by_commuting_part(self, rng):
        f = PowerLaw(q=2.0)
        for rho in make_states(rng, dims=(3,), per_dim=3):
            h = random_hermitian(3, rng)
            diff = effective_hamiltonian(rho, h, f) - generator(rho, h, f)
            v = rho.eigenvectors
            in_basis = v.conj().T @ diff @ v
            offdiag = in_basis - np.diag(np.diag(in_basis))
            assert np.linalg.norm(offdiag) < 1e-10


class TestGenerator:
    def test_commutator_identity_random(self, rng):
        from nvne.hermitian import matrix_function

        for q in (0.5, 1.5, 2.0, 3.0):
            f = PowerLaw(q=q)
            for rho in make_states(rng, dims=(2, 4), per_dim=2):
                h = random_hermitian(rho.dim, rng)
                g = generator(rho, h, f)
                lhs = comm(g, rho.matrix)
                rhs = comm(h, matrix_function(rho, f))
                assert np.linalg.norm(lhs - rhs) < 1e-10

    def test_commutator_identity_degenerate(self, rng):
        from nvne.hermitian import matrix_function

        f = PowerLaw(q=2.0)
        # rank-deficient and repeated-eigenvalue states
        states = [
            validate_density(np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)),
            validate_density(np.diag([0.4, 0.4, 0.2, 0.0]).astype(complex)),
            validate_density(np.eye(4, dtype=complex) / 4),
        ]
        for rho in states:
            h = random_hermitian(4, rng)
            g = generator(rho, h, f)
            lhs = comm(g, rho.matrix)
            rhs = comm(h, matrix_function(rho, f))
            assert np.linalg.norm(lhs - rhs) < 1e-10

    def test_pure_state_recovers_linear_dynamics(self, rng):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        rho = pure_state(psi)
        h = random_hermitian(4, rng)
        for q in (0.5, 2.0, 3.0):
            g = generator(rho, h, PowerLaw(q=q))
            assert np.linalg.norm(comm(g, rho.matrix) - comm(h, rho.matrix)) < 1e-7

    def test_maximally_mixed_fixed_point(self, rng):
        rho = validate_density(np.eye(3, dtype=complex) / 3)
        h = random_hermitian(3, rng)
        g = generator(rho, h, PowerLaw(q=2.0))
        assert np.linalg.norm(comm(g, rho.matrix)) < 1e-12

    def test_divided_difference_value(self):
        # eigenvalues 0.75/0.25 with q=2 give off-diagonal factor exactly 1
        rho = validate_density(np.diag([0.75, 0.25]).astype(complex))
        g = generator(rho, -SIGMA_X, PowerLaw(q=2.0))
        assert g[0, 1] == pytest.approx(-1.0)

    def test_series_deformation(self, rng):
        from nvne.hermitian import matrix_function

        f = CoefficientSeries(coeffs=(0.3, 0.2, 0.5))
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        g = generator(rho, h, f)
        assert np.linalg.norm(comm(g, rho.matrix) - comm(h, matrix_function(rho, f))) < 1e-10


class TestCasimirAndAverages:
    def test_casimir_values(self):
        mixed = validate_density(0.5 * np.eye(2, dtype=complex))
        assert casimir(mixed, 2) == pytest.approx(0.5)
        rho = validate_density(np.diag([0.75, 0.25]).astype(complex))
        assert casimir(rho, 2) == pytest.approx(0.625)

    def test_pure_state_casimirs_all_one(self, rng):
        rho = pure_state(rng.normal(size=3) + 1j * rng.normal(size=3))
        for n in range(1, 6):
            assert casimir(rho, n) == pytest.approx(1.0, abs=1e-12)

    def test_casimir_rejects_nonpositive_order(self, rng):
        with pytest.raises(DomainError):
            casimir(random_density_matrix(2, rng), 0)

    def test_q_average_oracle(self):
        rho = validate_density(np.diag([0.75, 0.25]).astype(complex))
        assert q_average(rho, -SIGMA_Z, 2.0) == pytest.approx(-0.5)

    def test_q_average_q1_is_plain_average(self, rng):
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        assert q_average(rho, h, 1.0) == pytest.approx(
            float(np.real(np.trace(rho.matrix @ h))), abs=1e-12)

    def test_q_average_pure_state(self, rng):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        rho = pure_state(psi)
        h = random_hermitian(3, rng)
        expected = float(np.real(psi.conj() @ h @ psi))
        for q in (0.5, 2.0, 3.3):
            assert q_average(rho, h, q) == pytest.approx(expected, abs=1e-7)


class TestGradients:
    def test_fd_matches_analytic_polynomial(self, rng):
        rho = random_density_matrix(3, rng)
        b = random_hermitian(3, rng)
        func = trace_polynomial_functional([0.2, -0.4, 1.2], b)
        analytic = func.gradient_at(rho)
        fd = finite_difference_gradient(func.evaluator, rho.matrix)
        assert np.max(np.abs(analytic - fd)) / np.max(np.abs(analytic)) < 1e-5

    def test_fd_matches_analytic_integer_q_average(self, rng):
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        func = q_average_functional(h, 2.0)
        analytic = func.gradient_at(rho)
        fd = finite_difference_gradient(func.evaluator, rho.matrix)
        assert np.max(np.abs(analytic - fd)) / np.max(np.abs(analytic)) < 1e-5

    def test_casimir_gradient(self, rng):
        rho = random_density_matrix(3, rng)
        func = casimir_functional(3)
        assert np.allclose(func.gradient_at(rho), 3 * np.linalg.matrix_power(rho.matrix, 2),
                           atol=1e-12)

    def test_gradient_failure_on_asymmetric_evaluator(self, rng):
        rho = random_density_matrix(2, rng)

        def lopsided(m):
            return float(m[0, 1].real)  # not a function of a Hermitian argument

        with pytest.raises(GradientFailure):
            finite_difference_gradient(lopsided, rho.matrix)


class TestPoissonBracket:
    def test_self_bracket_zero(self, rng):
        rho = random_density_matrix(3, rng)
        func = trace_polynomial_functional([1.0], random_hermitian(3, rng))
        assert poisson_bracket(func, func, rho) == 0.0

    def test_antisymmetry(self, rng):
        rho = random_density_matrix(3, rng)
        a = trace_polynomial_functional([0.5, 0.5], random_hermitian(3, rng))
        b = trace_polynomial_functional([1.5, -0.5], random_hermitian(3, rng))
        assert abs(poisson_bracket(a, b, rho) + poisson_bracket(b, a, rho)) < 1e-8

    def test_casimirs_commute_with_everything(self, rng):
        for _ in range(3):
            rho = random_density_matrix(4, rng)
            func = trace_polynomial_functional(rng.normal(size=3), random_hermitian(4, rng))
            for n in range(1, 5):
                assert abs(poisson_bracket(casimir_functional(n), func, rho)) < 1e-6

    def test_casimirs_commute_with_fd_functionals(self, rng):
        rho = random_density_matrix(3, rng)
        b = random_hermitian(3, rng)
        fd_func = ObservableFunctional(
            evaluator=lambda m: float(np.trace(m @ m @ b).real), name="fd-only")
        for n in (1, 2, 3):
            assert abs(poisson_bracket(casimir_functional(n), fd_func, rho)) < 1e-6

    def test_q_averages_commute(self, rng):
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        for n in (1, 2, 3):
            for m in (1, 2, 3):
                val = poisson_bracket(q_average_functional(h, float(n)),
                                      q_average_functional(h, float(m)), rho)
                assert abs(val) < 1e-6

    def test_energy_generates_motion(self, rng):
        # d/dt F = {F, <H>_f} along i drho/dt = [H, f(rho)]
        from nvne.dynamics import IntegratorConfig, evolve

        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng, spectral_norm=1.0)
        f = PowerLaw(q=2.0)
        obs = trace_polynomial_functional([0.0, 1.0], random_hermitian(3, rng))
        energy = q_average_functional(h, 2.0)
        bracket_rate = poisson_bracket(obs, energy, rho)
        dt = 1e-5
        traj = evolve(rho, h, f, IntegratorConfig(dt=dt, t_final=2 * dt, record_every=1))
        numeric_rate = (obs(traj.states[2]) - obs(traj.states[0])) / (2 * dt)
        assert bracket_rate == pytest.approx(numeric_rate, rel=1e-4, abs=1e-8)

    def test_leibniz_rule(self, rng):
        rho = random_density_matrix(3, rng)
        a = trace_polynomial_functional([1.0], random_hermitian(3, rng), name="A")
        b = trace_polynomial_functional([0.0, 1.0], random_hermitian(3, rng), name="B")
        c = trace_polynomial_functional([0.5, 0.5], random_hermitian(3, rng), name="C")

        def product_functional(f1, f2):
            def ev(m):
                return f1.evaluator(m) * f2.evaluator(m)

            def grad(state):
                return f1(state) * f2.gradient_at(state) + f2(state) * f1.gradient_at(state)

            return ObservableFunctional(evaluator=ev, gradient=grad, name="AB")

        ab = product_functional(a, b)
        lhs = poisson_bracket(ab, c, rho)
        rhs = a(rho) * poisson_bracket(b, c, rho) + poisson_bracket(a, c, rho) * b(rho)
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-6)

    def test_gauge_invariance_under_identity_shift(self, rng):
        rho = random_density_matrix(3, rng)
        h = random_hermitian(3, rng)
        a = q_average_functional(h, 2.0)
        b = trace_polynomial_functional([0.3, 0.7], random_hermitian(3, rng))

        def shifted_grad(state):
            return a.gradient_at(state) + 5.0 * np.eye(3)

        a_shifted = ObservableFunctional(evaluator=a.evaluator, gradient=shifted_grad)
        assert poisson_bracket(a, b, rho) == pytest.approx(
            poisson_bracket(a_shifted, b, rho), abs=1e-12)
