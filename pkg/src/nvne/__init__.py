"""Structure-preserving simulator for i*drho/dt = [H, f(rho)].

Deformations f with f(0)=0, f(1)=1 (power law f(x)=x**q in particular)
keep pure-state dynamics linear while mixed states precess at
eigenvalue-dependent rates. Integration is by unitary conjugation with
the divided-difference generator, so spectra, Casimirs Tr(rho^n) and the
deformed energy are conserved structurally. Includes the two-subsystem
extension, nonextensive thermodynamics (S_q, U_q, F = U_q - T S_q,
spin-1/2 equilibrium), classical-ensemble averaging with dephasing
diagnostics, and a JSON-config CLI (`nvne run`).
"""

from .composite import (
    ClosureReport,
    CompositeSystem,
    composite_energy,
    evolve_composite,
    reduction_consistency,
)
from .deformation import CoefficientSeries, DeformationFunction, PowerLaw, power_law
from .dynamics import (
    IntegratorConfig,
    InvariantReport,
    Trajectory,
    evolve,
    invariant_report,
    larmor_frequency,
    precession_frequency,
    step,
)
from .ensemble import (
    EnsembleSpec,
    dephasing_analytic,
    ensemble_average,
    evolve_node,
    gauss_legendre,
    offdiagonal_magnitude,
    sin_psi_half_weight,
    tilted_weight,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainError,
    GradientFailure,
    IoError,
    NotHermitian,
    NotPositive,
    NumericalFailure,
    NvneError,
    OutOfDomain,
    SignalTooWeak,
    ZeroTrace,
)
from .hermitian import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BlochParams,
    DensityMatrix,
    SpectralDecomposition,
    bloch_state,
    bloch_vector,
    matrix_function,
    partial_trace,
    pure_state,
    random_density_matrix,
    random_hermitian,
    spectral_decompose,
    tensor_product,
    tensor_state,
    trace_distance,
    trace_norm,
    validate_density,
)
from .structure import (
    ObservableFunctional,
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
)
from .thermo import (
    EquilibriumResult,
    ThermoParams,
    free_energy,
    internal_energy,
    minimize_free_energy_diagonal,
    spin_equilibrium,
    spin_free_energy,
    stability_second_derivative,
    tsallis_entropy,
)

__version__ = "0.1.0"
