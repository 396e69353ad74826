"""Exception types raised by the simulator.

All errors derive from NvneError so callers can catch the whole family.
DomainError and its subclasses signal mathematically invalid inputs
(CLI exit code 3); ConfigError signals a bad scenario file (exit code 2).
"""


class NvneError(Exception):
    pass


class NotHermitian(NvneError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositive(NvneError):
    """An eigenvalue is more negative than the clipping window allows."""


class ZeroTrace(NvneError):
    """Trace is too close to zero to normalize."""


class NumericalFailure(NvneError):
    """An eigensolver or iteration did not converge."""


class DomainError(NvneError):
    """Input lies outside the mathematical domain of an operation."""


class DimensionMismatch(NvneError):
    """Operand dimensions are inconsistent."""


class GradientFailure(NvneError):
    """Finite differencing produced an unusable (non-Hermitian) gradient."""


class SignalTooWeak(NvneError):
    """A matrix element is too small for reliable phase extraction."""


class OutOfDomain(DomainError):
    """Closed-form equilibrium requested outside 0 < |q-1|*beta*mu < 1."""


class ConfigError(NvneError):
    """Scenario configuration is malformed; message names the offending key."""


class IoError(NvneError):
    """Output files could not be written."""
