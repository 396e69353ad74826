"""Hamiltonian structure of the nonlinear von Neumann equation.

The scalar energy <H>_f = Tr{(Tr rho) f(rho/Tr rho) H} is 1-homogeneous in
rho. Its variation yields the state-dependent effective Hamiltonian whose
commutator with rho reproduces [H, f(rho)]; Tr(rho^n) are Casimirs of the
underlying Lie-Poisson bracket, realized here in closed matrix form

    {A, B}(rho) = -i Tr(rho [grad A, grad B])

instead of through explicit gl(n) structure constants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .deformation import DEGENERACY_TOL, DeformationFunction, PowerLaw
from .errors import DomainError, GradientFailure, ZeroTrace
from .hermitian import (
    DensityMatrix,
    hermitian_part,
    hermiticity_defect,
    require_hermitian,
)

FD_STEP = 1e-6


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def hamiltonian_function(rho, h: np.ndarray, f: DeformationFunction) -> float:
    """Energy (Tr rho) * Tr[f(rho / Tr rho) H].

    Accepts a DensityMatrix or any Hermitian PSD matrix with positive
    trace; 1-homogeneous under rho -> c*rho.
    """
    m = _as_matrix(rho)
    h = np.asarray(h, dtype=complex)
    if isinstance(rho, DensityMatrix):
        w, v = rho.eigenvalues, rho.eigenvectors
        tau = 1.0
    else:
        m = require_hermitian(m, what="state")
        w, v = np.linalg.eigh(m)
        tau = float(np.sum(w))
        if tau < 1e-12:
            raise ZeroTrace(f"hamiltonian_function needs Tr > 0, got {tau:.3e}")
        if np.min(w) < -1e-12 * max(tau, 1.0):
            raise DomainError(f"state must be PSD, min eigenvalue {np.min(w):.3e}")
        w = np.clip(w, 0.0, None) / tau
    ht_diag = np.einsum("ij,jk,ki->i", v.conj().T, h, v).real
    return float(tau * np.sum(f.f(w) * ht_diag))


def _divided_difference_transform(
    eigenvalues: np.ndarray, eigenvectors: np.ndarray, h: np.ndarray, f: DeformationFunction
) -> np.ndarray:
    """H conjugated into the eigenbasis, scaled entrywise by the divided
    differences of f, and rotated back. Diagonal entries carry f'(lambda_i)
    (0 where the derivative diverges)."""
    v = eigenvectors
    ht = v.conj().T @ h @ v
    kernel = f.divided_difference(eigenvalues[:, None], eigenvalues[None, :])
    return v @ (ht * kernel) @ v.conj().T


def generator(rho: DensityMatrix, h: np.ndarray, f: DeformationFunction) -> np.ndarray:
    """Hermitian G with [G, rho] = [H, f(rho)].

    Built in the rho eigenbasis from divided differences of f; degenerate
    pairs take f' at the common eigenvalue, or 0 where f' diverges.
    """
    return hermitian_part(_divided_difference_transform(rho.eigenvalues, rho.eigenvectors, h, f))


def effective_hamiltonian(rho: DensityMatrix, h: np.ndarray, f: DeformationFunction) -> np.ndarray:
    """Variational derivative of the 1-homogeneous energy at a normalized state.

    Equals the divided-difference transform of H plus the scalar terms
    (Tr[f(rho) H] - Tr[rho f'(rho) H]) * identity, so that
    Tr[rho Heff(rho)] reproduces the energy exactly.
    """
    w = rho.eigenvalues
    if isinstance(f, PowerLaw) and f.q < 1.0 and np.any(w <= DEGENERACY_TOL):
        raise DomainError(
            f"f'(0) diverges for q={f.q} < 1; effective Hamiltonian undefined "
            "on the kernel of rho"
        )
    g = _divided_difference_transform(w, rho.eigenvectors, h, f)
    ht_diag = np.einsum("ij,jk,ki->i", rho.eigenvectors.conj().T, h, rho.eigenvectors).real
    scalar = float(np.sum(f.f(w) * ht_diag) - np.sum(w * f.fprime(w) * ht_diag))
    return hermitian_part(g + scalar * np.eye(rho.dim))


def casimir(rho: DensityMatrix, n: int) -> float:
    """C_n = Tr(rho^n) = sum of eigenvalues to the n-th power."""
    if n < 1:
        raise DomainError(f"Casimir order must be a positive integer, got {n}")
    return float(np.sum(rho.eigenvalues ** int(n)))


def q_average(rho: DensityMatrix, h: np.ndarray, q: float) -> float:
    """Tr(rho^q H), the internal energy of the power-law theory."""
    if q <= 0:
        raise DomainError(f"q must be positive, got {q}")
    return hamiltonian_function(rho, h, PowerLaw(q=q))


@dataclass(frozen=True)
class ObservableFunctional:
    """Real functional of the state with a Hermitian gradient.

    gradient(rho) returns the matrix G with dA = Tr(X G) for Hermitian
    perturbations X. When no analytic gradient is supplied, a central
    finite difference over the raw matrix entries is used and checked for
    Hermiticity (GradientFailure beyond 1e-6).
    """

    evaluator: Callable
    gradient: Callable | None = None
    name: str = "functional"

    def __call__(self, rho) -> float:
        return float(self.evaluator(_as_matrix(rho)))

    def gradient_at(self, rho) -> np.ndarray:
        m = _as_matrix(rho)
        if self.gradient is not None:
            return self.gradient(rho)
        return finite_difference_gradient(self.evaluator, m)


def finite_difference_gradient(evaluator: Callable, m: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central differences over every complex matrix entry (real and
    imaginary parts separately), assembled into the Hermitian gradient.

    The evaluator must accept slightly non-Hermitian arguments (matrix
    polynomials do). The raw Wirtinger-style derivative matrix must come
    out Hermitian on its own; a defect beyond 1e-6 raises GradientFailure.
    """
    dim = m.shape[0]
    raw = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            d_re = (evaluator(m + step * e) - evaluator(m - step * e)) / (2 * step)
            d_im = (evaluator(m + 1j * step * e) - evaluator(m - 1j * step * e)) / (2 * step)
            if not (np.isfinite(d_re) and np.isfinite(d_im)):
                raise GradientFailure(f"finite difference diverged at entry ({i}, {j})")
            # holomorphic dA/drho_ij = d_re - i*d_im lands at grad_ji so that
            # dA = Tr(X grad) for Hermitian perturbations X
            raw[j, i] = d_re - 1j * d_im
    defect = hermiticity_defect(raw)
    if defect > 1e-6:
        raise GradientFailure(
            f"finite-difference gradient non-Hermitian by {defect:.3e} (tol 1e-06)"
        )
    return hermitian_part(raw)


def trace_polynomial_functional(coeffs, b: np.ndarray, name: str = "trace-poly") -> ObservableFunctional:
    """A(rho) = Tr[(sum_k coeffs[k-1] rho^k) B] with its analytic gradient
    sum_k c_k sum_{a+b=k-1} rho^a B rho^b."""
    coeffs = tuple(float(c) for c in coeffs)
    b = np.asarray(b, dtype=complex)

    def evaluate(m: np.ndarray) -> float:
        acc = np.zeros_like(b)
        p = np.eye(m.shape[0], dtype=complex)
        for c in coeffs:
            p = p @ m
            acc = acc + c * p
        return float(np.trace(acc @ b).real)

    def grad(rho) -> np.ndarray:
        m = _as_matrix(rho)
        dim = m.shape[0]
        powers = [np.eye(dim, dtype=complex)]
        for _ in range(len(coeffs)):
            powers.append(powers[-1] @ m)
        out = np.zeros((dim, dim), dtype=complex)
        for k, c in enumerate(coeffs, start=1):
            if c == 0.0:
                continue
            out = out + c * sum(powers[a] @ b @ powers[k - 1 - a] for a in range(k))
        return hermitian_part(out)

    return ObservableFunctional(evaluator=evaluate, gradient=grad, name=name)


def casimir_functional(n: int) -> ObservableFunctional:
    """C_n = Tr rho^n with gradient n rho^(n-1)."""

    def evaluate(m: np.ndarray) -> float:
        return float(np.trace(np.linalg.matrix_power(m, n)).real)

    def grad(rho) -> np.ndarray:
        m = _as_matrix(rho)
        return hermitian_part(n * np.linalg.matrix_power(m, n - 1))

    return ObservableFunctional(evaluator=evaluate, gradient=grad, name=f"C{n}")


def q_average_functional(h: np.ndarray, q: float) -> ObservableFunctional:
    """<H>_q = Tr rho^q H with the divided-difference gradient."""
    h = np.asarray(h, dtype=complex)
    f = PowerLaw(q=q)

    def evaluate(m: np.ndarray) -> float:
        if float(q) == int(q):
            return float(np.trace(np.linalg.matrix_power(m, int(q)) @ h).real)
        w, v = np.linalg.eigh(hermitian_part(m))
        diag = np.einsum("ij,jk,ki->i", v.conj().T, h, v).real
        return float(np.sum(f.f(np.clip(w, 0.0, None)) * diag))

    def grad(rho) -> np.ndarray:
        if isinstance(rho, DensityMatrix):
            w, v = rho.eigenvalues, rho.eigenvectors
        else:
            w, v = np.linalg.eigh(require_hermitian(_as_matrix(rho)))
        return hermitian_part(_divided_difference_transform(w, v, h, f))

    return ObservableFunctional(evaluator=evaluate, gradient=grad, name=f"<H>_{q:g}")


def poisson_bracket(a: ObservableFunctional, b: ObservableFunctional, rho) -> float:
    """{A, B}(rho) = -i Tr(rho [grad A, grad B]); antisymmetric by
    construction and insensitive to adding multiples of the identity to
    either gradient."""
    m = _as_matrix(rho)
    ga = a.gradient_at(rho)
    gb = b.gradient_at(rho)
    comm = ga @ gb - gb @ ga
    value = -1j * np.trace(m @ comm)
    return float(value.real)
