import numpy as np
import pytest

from nvne.composite import (
    CompositeSystem,
    composite_energy,
    evolve_composite,
    reduction_consistency,
)
from nvne.dynamics import IntegratorConfig
from nvne.errors import DimensionMismatch, DomainError
from nvne.hermitian import (
    SIGMA_Z,
    partial_trace,
    pure_state,
    random_density_matrix,
    random_hermitian,
    tensor_state,
    validate_density,
)


def spin_system(q1=1.5, q2=2.5, mu1=1.0, mu2=0.7):
    return CompositeSystem(dim_1=2, dim_2=2, h1=-mu1 * SIGMA_Z, h2=-mu2 * SIGMA_Z,
                           q1=q1, q2=q2)


class TestCompositeSystem:
    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(DomainError):
            CompositeSystem(dim_1=2, dim_2=2, h1=SIGMA_Z, h2=SIGMA_Z, q1=0.0, q2=2.0)

    def test_rejects_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            CompositeSystem(dim_1=3, dim_2=2, h1=SIGMA_Z, h2=SIGMA_Z, q1=1.0, q2=1.0)

    def test_rejects_wrong_state_dim(self, rng):
        sys_ = spin_system()
        rho = random_density_matrix(3, rng)
        with pytest.raises(DimensionMismatch):
            evolve_composite(rho, sys_, IntegratorConfig(dt=1e-2, t_final=0.1))


class TestEvolveComposite:
    def test_commuting_product_state_constant(self):
        a = validate_density(np.diag([0.7, 0.3]).astype(complex))
        b = validate_density(np.diag([0.6, 0.4]).astype(complex))
        joint = tensor_state(a, b)
        traj = evolve_composite(joint, spin_system(), IntegratorConfig(dt=1e-2, t_final=1.0))
        for s in traj.states:
            assert np.allclose(s.matrix, joint.matrix, atol=1e-12)

    def test_product_state_stays_product(self, rng):
        a = random_density_matrix(2, rng)
        b = random_density_matrix(2, rng)
        joint = tensor_state(a, b)
        sys_ = spin_system()
        cfg = IntegratorConfig(dt=1e-3, t_final=2.0, record_every=100)
        traj = evolve_composite(joint, sys_, cfg)
        for s in traj.states:
            ra = partial_trace(s, (2, 2), "I")
            rb = partial_trace(s, (2, 2), "II")
            rebuilt = np.kron(ra.matrix, rb.matrix)
            assert np.max(np.abs(rebuilt - s.matrix)) < 1e-7

    def test_bell_reduction_is_fixed_point(self):
        bell = pure_state(np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2))
        sys_ = CompositeSystem(dim_1=2, dim_2=2, h1=-SIGMA_Z,
                               h2=np.zeros((2, 2), dtype=complex), q1=2.0, q2=2.0)
        cfg = IntegratorConfig(dt=1e-3, t_final=2.0, record_every=100)
        traj = evolve_composite(bell, sys_, cfg)
        for s in traj.states:
            red = partial_trace(s, (2, 2), "I")
            assert np.allclose(red.matrix, 0.5 * np.eye(2), atol=1e-10)

    def test_casimirs_and_spectrum_conserved(self, rng):
        rho = random_density_matrix(4, rng)
        cfg = IntegratorConfig(dt=1e-3, t_final=10.0, record_every=100)
        traj = evolve_composite(rho, spin_system(), cfg)
        log = traj.invariant_log
        ev = log["eigenvalues"]
        assert np.max(np.abs(ev - ev[0])) < 1e-9
        for n in range(1, 5):
            series = log[f"C{n}"]
            assert np.max(np.abs(series - series[0])) / abs(series[0]) < 1e-8

    def test_energy_conserved(self, rng):
        rho = random_density_matrix(4, rng)
        cfg = IntegratorConfig(dt=1e-3, t_final=5.0, record_every=100)
        traj = evolve_composite(rho, spin_system(), cfg)
        hq = traj.invariant_log["Hq"]
        assert np.max(np.abs(hq - hq[0])) < 1e-8

    def test_purity_of_reductions_constant(self, rng):
        rho = random_density_matrix(4, rng)
        cfg = IntegratorConfig(dt=1e-3, t_final=5.0, record_every=100)
        traj = evolve_composite(rho, spin_system(), cfg)
        purities = np.array(
            [partial_trace(s, (2, 2), "I").purity() for s in traj.states]
        )
        assert np.max(np.abs(purities - purities[0])) < 1e-8


class TestReductionConsistency:
    def test_entangled_closure(self, rng):
        rho = random_density_matrix(4, rng)  # generic states are entangled
        sys_ = spin_system(q1=1.5, q2=2.5)
        cfg = IntegratorConfig(dt=1e-3, t_final=10.0, record_every=50)
        traj = evolve_composite(rho, sys_, cfg)
        report = reduction_consistency(traj, sys_, cfg)
        assert report.max_deviation < 1e-7

    def test_product_closure(self, rng):
        a = random_density_matrix(2, rng)
        b = random_density_matrix(2, rng)
        joint = tensor_state(a, b)
        sys_ = spin_system()
        cfg = IntegratorConfig(dt=1e-3, t_final=10.0, record_every=50)
        report = reduction_consistency(evolve_composite(joint, sys_, cfg), sys_, cfg)
        assert report.max_deviation < 1e-7

    def test_maximally_mixed_fixed_point(self):
        joint = validate_density(np.eye(4, dtype=complex) / 4)
        sys_ = spin_system()
        cfg = IntegratorConfig(dt=1e-2, t_final=1.0)
        traj = evolve_composite(joint, sys_, cfg)
        report = reduction_consistency(traj, sys_, cfg)
        assert report.max_deviation < 1e-12
        for s in traj.states:
            assert np.allclose(s.matrix, joint.matrix, atol=1e-13)

    def test_composite_energy_matches_subsystem_averages(self, rng):
        rho = random_density_matrix(4, rng)
        sys_ = spin_system()
        from nvne.structure import q_average

        e = composite_energy(rho, sys_)
        e1 = q_average(partial_trace(rho, (2, 2), "I"), sys_.h1, sys_.q1)
        e2 = q_average(partial_trace(rho, (2, 2), "II"), sys_.h2, sys_.q2)
        assert e == pytest.approx(e1 + e2, abs=1e-12)
