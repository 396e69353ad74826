"""Classical mixtures of spin initial conditions and their dephasing.

A weight density w(lam, phi, psi) over [0,1] x [0,pi] x [0,2pi] (measure
dlam sin(phi) dphi dpsi) is averaged with Gauss-Legendre product
quadrature. Each node evolves isospectrally; for H = -mu sigma_z the
closed-form node motion (phi, lam frozen, psi(t) = psi0 - omega(lam) t)
is used, with the integrator as fallback and cross-check.

Note on the shipped sin(psi/2) weight: the transverse components of its
average vanish identically for every power-law deformation, because the
lam integrand is odd about lam = 1/2 while omega(lam) is even. The
quadrature is authoritative here; the tilted weight (extra factor 2*lam)
breaks that symmetry and exhibits genuine dephasing decay.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .deformation import DeformationFunction
from .dynamics import IntegratorConfig, evolve, larmor_frequency
from .errors import DimensionMismatch, DomainError
from .hermitian import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    bloch_state,
    validate_density,
)

NORMALIZATION_TOL = 1e-8


def sin_psi_half_weight(lam, phi, psi):
    """w = (1/8) sin(psi/2); normalized against the sin(phi) measure."""
    return (1.0 / 8.0) * np.sin(np.asarray(psi) / 2.0) * np.ones_like(np.asarray(lam, dtype=float))


def tilted_weight(lam, phi, psi):
    """w = 2*lam * (1/8) sin(psi/2); lam-asymmetric variant that actually
    dephases (documented deviation; the symmetric weight has no transverse
    signal to decay)."""
    return 2.0 * lam * (1.0 / 8.0) * np.sin(psi / 2.0)


WEIGHTS = {"sin-psi-half": sin_psi_half_weight, "tilted-lambda": tilted_weight}


def gauss_legendre(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class EnsembleSpec:
    """Weight density plus quadrature sizes, deformation and field."""

    weight: Callable
    f: DeformationFunction
    h: np.ndarray
    n_lam: int = 32
    n_phi: int = 32
    n_psi: int = 32
    _grids: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.shape != (2, 2):
            raise DimensionMismatch("ensemble spins are 2x2; H must be 2x2")
        object.__setattr__(self, "h", h)
        norm = self.normalization()
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise DomainError(
                f"weight quadrature normalizes to {norm!r}, expected 1 "
                f"within {NORMALIZATION_TOL:.0e}"
            )

    def grids(self):
        if not self._grids:
            lam, wl = gauss_legendre(self.n_lam, 0.0, 1.0)
            phi, wp = gauss_legendre(self.n_phi, 0.0, np.pi)
            psi, ws = gauss_legendre(self.n_psi, 0.0, 2.0 * np.pi)
            big_l, big_p, big_s = np.meshgrid(lam, phi, psi, indexing="ij")
            wl3, wp3, ws3 = np.meshgrid(wl, wp, ws, indexing="ij")
            weights = self.weight(big_l, big_p, big_s) * np.sin(big_p) * wl3 * wp3 * ws3
            self._grids.update(lam=big_l, phi=big_p, psi=big_s, w=weights)
        return self._grids

    def normalization(self) -> float:
        return float(np.sum(self.grids()["w"]))

    @property
    def mu(self) -> float:
        """Field strength for H = -mu sigma_z (closed-form node motion)."""
        h = self.h
        if abs(h[0, 1]) > 1e-12 or abs(h[0, 0] + h[1, 1]) > 1e-12:
            raise DomainError("closed-form node evolution needs H = -mu*sigma_z")
        return float(-h[0, 0].real)

    def uses_closed_form(self) -> bool:
        h = self.h
        return bool(abs(h[0, 1]) <= 1e-12 and abs(h[0, 0] + h[1, 1]) <= 1e-12)


def node_frequencies(spec: EnsembleSpec) -> np.ndarray:
    lam = spec.grids()["lam"]
    return 2.0 * spec.mu * spec.f.divided_difference(lam, 1.0 - lam)


def ensemble_average(spec: EnsembleSpec, t: float, cfg: IntegratorConfig | None = None) -> DensityMatrix:
    """Quadrature-weighted average of the node states at time t."""
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    g = spec.grids()
    if spec.uses_closed_form():
        psi_t = g["psi"] - node_frequencies(spec) * t
        w = g["w"]
        c = 0.5 * (2.0 * g["lam"] - 1.0)
        coeff_z = float(np.sum(w * c * np.cos(g["phi"])))
        coeff_x = float(-np.sum(w * c * np.sin(g["phi"]) * np.cos(psi_t)))
        coeff_y = float(-np.sum(w * c * np.sin(g["phi"]) * np.sin(psi_t)))
        total = float(np.sum(w))
        avg = (
            0.5 * total * IDENTITY_2
            + coeff_x * SIGMA_X
            + coeff_y * SIGMA_Y
            + coeff_z * SIGMA_Z
        )
        return validate_density(avg)
    if cfg is None:
        raise DomainError("integrator config required when H is not -mu*sigma_z")
    return _ensemble_average_integrated(spec, t, cfg)


def _ensemble_average_integrated(spec: EnsembleSpec, t: float, cfg: IntegratorConfig) -> DensityMatrix:
    g = spec.grids()
    lam = g["lam"].ravel()
    phi = g["phi"].ravel()
    psi = g["psi"].ravel()
    w = g["w"].ravel()
    acc = np.zeros((2, 2), dtype=complex)
    run_cfg = IntegratorConfig(dt=cfg.dt, t_final=max(t, cfg.dt), scheme=cfg.scheme,
                               record_every=10**9)
    for k in range(lam.size):
        rho0 = bloch_state(lam=lam[k], phi=phi[k], psi=psi[k])
        if t < cfg.dt / 2:
            acc += w[k] * rho0.matrix
            continue
        traj = evolve(rho0, spec.h, spec.f, run_cfg)
        acc += w[k] * traj.states[-1].matrix
    return validate_density(acc)


def evolve_node(spec: EnsembleSpec, lam: float, phi: float, psi: float, t: float) -> DensityMatrix:
    """Closed-form node state at time t (frozen spectrum, rotated azimuth)."""
    omega = larmor_frequency(lam, spec.f, spec.mu)
    return bloch_state(lam=lam, phi=phi, psi=psi - omega * t)


def transverse_coefficients(t: float, f: DeformationFunction, mu: float, n_lam: int,
                            lam_density: Callable | None = None) -> tuple[float, float]:
    """(sigma_x, sigma_y) coefficients of the averaged state from the
    reduced lam integral:

        cx = (pi/24) int u(lam) (2 lam - 1) cos(omega(lam) t) dlam
        cy = -(pi/24) int u(lam) (2 lam - 1) sin(omega(lam) t) dlam

    u = 1 reproduces the sin(psi/2) weight after the phi and psi averages
    (factors pi/2 and -1/6). The sign of cy follows the quadrature, which
    is authoritative for this artifact.
    """
    if n_lam < 16:
        raise DomainError(f"n_lam must be at least 16, got {n_lam}")
    lam, wl = gauss_legendre(n_lam, 0.0, 1.0)
    u = np.ones_like(lam) if lam_density is None else lam_density(lam)
    omega = 2.0 * mu * f.divided_difference(lam, 1.0 - lam)
    base = wl * u * (2.0 * lam - 1.0)
    cx = (np.pi / 24.0) * float(np.sum(base * np.cos(omega * t)))
    cy = -(np.pi / 24.0) * float(np.sum(base * np.sin(omega * t)))
    return cx, cy


def dephasing_analytic(t: float, f: DeformationFunction, mu: float, n_lam: int = 64,
                       lam_density: Callable | None = None) -> DensityMatrix:
    """Averaged state from the reduced lam integral (Gauss-Legendre)."""
    cx, cy = transverse_coefficients(t, f, mu, n_lam, lam_density)
    return validate_density(0.5 * IDENTITY_2 + cx * SIGMA_X + cy * SIGMA_Y)


def offdiagonal_magnitude(state: DensityMatrix) -> float:
    return float(abs(state.matrix[0, 1]))
