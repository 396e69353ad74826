"""Deformation functions f for the nonlinear evolution i*drho/dt = [H, f(rho)].

Any f with f(0) = 0 and f(1) = 1 leaves pure states on linear trajectories.
Two families are provided: the power law f(x) = x**q (q > 0) and finite
coefficient series f(x) = sum_k c_k x**k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# eigenvalue pairs closer than this use the derivative limit of the
# divided difference
DEGENERACY_TOL = 1e-10

_ENDPOINT_TOL = 1e-12


class DeformationFunction:
    """Common interface: f(x), f'(x) and the divided difference of f."""

    def f(self, x):
        raise NotImplementedError

    def fprime(self, x):
        raise NotImplementedError

    def divided_difference(self, a, b):
        """(f(a) - f(b)) / (a - b), with f'((a+b)/2) on near-degenerate pairs.

        Where the derivative limit itself diverges (power law with q < 1 at
        zero) the entry is set to 0; the commutator it feeds vanishes there
        regardless.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        diff = a - b
        safe = np.where(diff == 0.0, 1.0, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (self.f(a) - self.f(b)) / safe
            limit = self.fprime((a + b) / 2.0)
        limit = np.where(np.isfinite(limit), limit, 0.0)
        out = np.where(np.abs(diff) > DEGENERACY_TOL, ratio, limit)
        if out.ndim == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class PowerLaw(DeformationFunction):
    """f(x) = x**q with q > 0, so that f(0) = 0 and f(1) = 1."""

    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"power-law exponent must be positive, got q={self.q}")

    @property
    def is_identity(self) -> bool:
        return abs(self.q - 1.0) < 1e-14

    def f(self, x):
        x = np.asarray(x, dtype=float)
        if float(self.q) == int(self.q):
            return x ** self.q
        if np.any(x < -_ENDPOINT_TOL):
            raise DomainError(
                f"x**q with non-integer q={self.q} needs x >= 0; "
                f"got min {float(np.min(x)):.3e}"
            )
        return np.clip(x, 0.0, None) ** self.q

    def fprime(self, x):
        x = np.asarray(x, dtype=float)
        if self.q >= 1 or float(self.q) == int(self.q):
            with np.errstate(invalid="ignore"):
                out = self.q * np.clip(x, 0.0, None) ** (self.q - 1.0)
            return out
        # q < 1: derivative diverges at 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.q * np.clip(x, 0.0, None) ** (self.q - 1.0)
        return out


@dataclass(frozen=True)
class CoefficientSeries(DeformationFunction):
    """f(x) = sum_{k>=1} coeffs[k-1] * x**k with sum(coeffs) = 1.

    The constant term is absent by construction (f(0) = 0); f(1) = 1 is
    checked at construction.
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise DomainError("coefficient series needs at least one term")
        if abs(sum(self.coeffs) - 1.0) > _ENDPOINT_TOL:
            raise DomainError(
                f"series must satisfy f(1)=1; sum of coefficients is {sum(self.coeffs)!r}"
            )

    def f(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x**k for k, c in enumerate(self.coeffs, start=1))

    def fprime(self, x):
        x = np.asarray(x, dtype=float)
        return sum(k * c * x ** (k - 1) for k, c in enumerate(self.coeffs, start=1))


def power_law(q: float) -> PowerLaw:
    return PowerLaw(q=float(q))


IDENTITY = PowerLaw(q=1.0)
