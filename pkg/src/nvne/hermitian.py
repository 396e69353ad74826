"""Validated Hermitian matrix algebra for density-matrix dynamics.

Everything is dense complex numpy; matrix functions go through the
eigendecomposition (exact on the spectrum, no Taylor series), which also
covers fractional powers x**q that have no expansion at 0.

Conventions: hbar = k_B = 1; subsystem I is the slow (leftmost) Kronecker
index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    NotHermitian,
    NotPositive,
    NumericalFailure,
    ZeroTrace,
)

TOL_HERM = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def hermiticity_defect(a: np.ndarray) -> float:
    """Max absolute elementwise deviation from the conjugate transpose."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def require_hermitian(a: np.ndarray, tol: float = TOL_HERM, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"{what} deviates from Hermiticity by {defect:.3e} (tol {tol:.1e})")
    return hermitian_part(a)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decompose(a: np.ndarray, tol: float = TOL_HERM) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = require_hermitian(a, tol)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    w.setflags(write=False)
    v.setflags(write=False)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state.

    Construct through validate_density (or the helpers below); the raw
    constructor trusts its inputs. Instances are immutable; the backing
    arrays are write-protected.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.sum(self.eigenvalues**2))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(self.purity() - 1.0) < tol


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def validate_density(matrix: np.ndarray, tol: float = TOL_HERM) -> DensityMatrix:
    """Validate and repair a candidate state.

    The matrix is symmetrized, eigenvalues in [-tol, 0) are clipped to 0,
    and the trace is renormalized to 1. Anything worse is an error, not a
    silent repair: NotHermitian beyond tol, NotPositive below -tol,
    ZeroTrace when |Tr| < tol.
    """
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"state must be square, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitian(f"state deviates from Hermiticity by {defect:.3e} (tol {tol:.1e})")
    m = hermitian_part(m)
    trace = float(np.trace(m).real)
    if abs(trace) < tol:
        raise ZeroTrace(f"state trace {trace:.3e} too close to zero")
    spec = spectral_decompose(m, tol=np.inf)
    w = spec.eigenvalues.copy()
    if np.any(w < -tol):
        raise NotPositive(
            f"state has eigenvalue {float(np.min(w)):.3e} below -{tol:.1e}"
        )
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total < tol:
        raise ZeroTrace(f"state trace {total:.3e} after clipping too close to zero")
    w /= total
    v = spec.eigenvectors
    mat = hermitian_part((v * w) @ v.conj().T)
    _freeze(mat, w, v)
    return DensityMatrix(matrix=mat, eigenvalues=w, eigenvectors=v)


def density_from_spectrum(eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> DensityMatrix:
    """Assemble a state from a known spectral decomposition (trusted path).

    Used by the integrator, where unitary conjugation preserves the
    spectrum by construction.
    """
    w = np.asarray(eigenvalues, dtype=float).copy()
    v = np.ascontiguousarray(eigenvectors, dtype=complex)
    mat = hermitian_part((v * w) @ v.conj().T)
    _freeze(mat, w, v)
    return DensityMatrix(matrix=mat, eigenvalues=w, eigenvectors=v)


def pure_state(vector: np.ndarray) -> DensityMatrix:
    """|psi><psi| for a nonzero vector psi (normalized internally)."""
    psi = np.asarray(vector, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm < 1e-15:
        raise ZeroTrace("cannot build a pure state from the zero vector")
    psi = psi / norm
    return validate_density(np.outer(psi, psi.conj()))


def matrix_function(spec: SpectralDecomposition | DensityMatrix, f) -> np.ndarray:
    """f applied on the spectrum: V diag(f(lambda_i)) V^dagger.

    f is a DeformationFunction (or anything with .f). Raises DomainError,
    via the deformation, if a clearly negative eigenvalue meets a
    non-integer power.
    """
    w, v = spec.eigenvalues, spec.eigenvectors
    fw = f.f(w) if hasattr(f, "f") else f(w)
    return hermitian_part((v * fw) @ v.conj().T)


def trace_function(state: DensityMatrix, f) -> float:
    """Tr f(rho) computed directly on the eigenvalues (exact by construction)."""
    fw = f.f(state.eigenvalues) if hasattr(f, "f") else f(state.eigenvalues)
    return float(np.sum(fw))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor on the slow index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_state(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return validate_density(tensor_product(a.matrix, b.matrix))


def partial_trace(rho_ab, dims: tuple[int, int], keep: str) -> DensityMatrix:
    """Reduce a bipartite state to subsystem 'I' (slow index) or 'II'.

    Accepts a DensityMatrix or a raw matrix; the result is validated.
    """
    m = rho_ab.matrix if isinstance(rho_ab, DensityMatrix) else np.asarray(rho_ab, dtype=complex)
    d1, d2 = int(dims[0]), int(dims[1])
    if m.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(
            f"state of shape {m.shape} does not factor as ({d1}x{d2})^2"
        )
    t = m.reshape(d1, d2, d1, d2)
    if keep == "I":
        red = np.einsum("ijkj->ik", t)
    elif keep == "II":
        red = np.einsum("ijil->jl", t)
    else:
        raise DomainError(f"keep must be 'I' or 'II', got {keep!r}")
    return validate_density(red)


def partial_trace_matrix(m: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Partial trace without validation; used in inner integrator loops."""
    d1, d2 = dims
    t = m.reshape(d1, d2, d1, d2)
    return np.einsum("ijkj->ik", t) if keep == "I" else np.einsum("ijil->jl", t)


@dataclass(frozen=True)
class BlochParams:
    """Spin-1/2 state parameters: eigenvalue lam (partner 1-lam), polar
    angle phi and azimuth psi."""

    lam: float
    phi: float
    psi: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"lam must lie in [0, 1], got {self.lam}")


def bloch_state(params: BlochParams | None = None, *, lam=None, phi=None, psi=None) -> DensityMatrix:
    """State with eigenvalues {lam, 1-lam}:

        rho = 1/2 + (2*lam-1)/2 * [cos(phi) sz - sin(phi)(cos(psi) sx + sin(psi) sy)]
    """
    if params is None:
        params = BlochParams(lam=float(lam), phi=float(phi), psi=float(psi))
    c = 0.5 * (2.0 * params.lam - 1.0)
    direction = (
        np.cos(params.phi) * SIGMA_Z
        - np.sin(params.phi) * (np.cos(params.psi) * SIGMA_X + np.sin(params.psi) * SIGMA_Y)
    )
    return validate_density(0.5 * IDENTITY_2 + c * direction)


def bloch_vector(state: DensityMatrix) -> np.ndarray:
    """Cartesian Bloch components (n_x, n_y, n_z) of a qubit state."""
    if state.dim != 2:
        raise DimensionMismatch("Bloch vector is defined for 2x2 states")
    m = state.matrix
    return np.array(
        [
            2.0 * m[0, 1].real,
            -2.0 * m[0, 1].imag,
            (m[0, 0] - m[1, 1]).real,
        ]
    )


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(a)))))


def trace_distance(a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray) -> float:
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    return 0.5 * trace_norm(ma - mb)


def random_hermitian(dim: int, rng: np.random.Generator, spectral_norm: float | None = None) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = hermitian_part(a)
    if spectral_norm is not None:
        h = h * (spectral_norm / np.linalg.norm(h, 2))
    return h


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state rho = A A^dagger / Tr."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return validate_density(m / np.trace(m).real)
