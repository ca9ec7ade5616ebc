import math

import numpy as np
import pytest

from scarsim.errors import CapacityError, ConfigError, NumericalError
from scarsim.evolve import (
    EvolutionConfig,
    dense_propagator,
    entanglement_entropy,
    propagate_step,
    quench_from_csv,
    quench_to_csv,
    reduced_density_matrix,
    run_quench,
)
from scarsim.hamiltonian import DriveProfile, build_pxp, build_rydberg, detuning_at
from scarsim.hilbert import canonical_states, enumerate_blockaded
from scarsim.lattice import PhysicalParams, build_lattice, optimal_detuning


@pytest.fixture(scope="module")
def p():
    return PhysicalParams.from_mhz(4.2, 51.0)


@pytest.fixture(scope="module")
def system8(p):
    lat = build_lattice("chain", 8)
    basis = enumerate_blockaded(lat)
    parts = build_rydberg(lat, basis, p)
    return lat, basis, parts


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


class TestPropagateStep:
    def test_zero_hamiltonian_identity(self):
        lat = build_lattice("chain", 5)
        basis = enumerate_blockaded(lat)
        parts = build_pxp(lat, basis, PhysicalParams(omega=1e-300, v0=1.0))
        psi = random_state(basis.dim, 0)
        out = propagate_step(parts, DriveProfile.constant(0.0), psi, 0.0, 0.01)
        assert np.allclose(out, psi, atol=1e-12)

    def test_diagonal_phases_exact(self, p):
        lat = build_lattice("chain", 6)
        basis = enumerate_blockaded(lat)
        parts = build_rydberg(lat, basis, PhysicalParams(omega=1e-300, v0=p.v0))
        psi = random_state(basis.dim, 1)
        delta = 0.4 * p.omega
        dt = 0.02
        out = propagate_step(parts, DriveProfile.constant(delta), psi, 0.0, dt)
        expect = psi * np.exp(-1j * parts.diagonal(delta) * dt)
        assert np.abs(out - expect).max() < 1e-12

    def test_matches_dense_oracle_constant(self, system8):
        _, basis, parts = system8
        psi = random_state(basis.dim, 2)
        drive = DriveProfile.constant(0.3)
        dt, steps = 0.002, 400
        out = psi.copy()
        for k in range(steps):
            out = propagate_step(parts, drive, out, k * dt, dt)
        ref = dense_propagator(parts, drive.delta0, steps * dt) @ psi
        assert np.abs(out - ref).max() < 1e-8

    def test_matches_dense_oracle_cosine(self, p, system8):
        _, basis, parts = system8
        psi = random_state(basis.dim, 3)
        drive = DriveProfile.cosine(0.55 * p.omega, 0.55 * p.omega, 1.2 * p.omega)
        dt = 0.001
        out, ref = psi.copy(), psi.copy()
        for k in range(300):
            t = k * dt
            out = propagate_step(parts, drive, out, t, dt)
            ref = dense_propagator(parts, detuning_at(drive, t + dt / 2), dt) @ ref
        assert np.abs(out - ref).max() < 1e-8

    def test_second_order_in_dt(self, p, system8):
        _, basis, parts = system8
        psi0 = random_state(basis.dim, 4)
        drive = DriveProfile.cosine(0.55 * p.omega, 0.55 * p.omega, 1.2 * p.omega)

        def final(dt):
            n = int(round(0.2 / dt))
            psi = psi0.copy()
            for k in range(n):
                psi = propagate_step(parts, drive, psi, k * dt, dt)
            return psi

        r1 = np.linalg.norm(final(0.004) - final(0.002))
        r2 = np.linalg.norm(final(0.002) - final(0.001))
        assert 3.2 < r1 / r2 < 4.8

    def test_reversibility(self, p, system8):
        _, basis, parts = system8
        psi0 = random_state(basis.dim, 5)
        drive = DriveProfile.cosine(0.55 * p.omega, 0.55 * p.omega, 1.2 * p.omega)
        dt, n = 0.002, 500
        psi = psi0.copy()
        for k in range(n):
            psi = propagate_step(parts, drive, psi, k * dt, dt)
        for k in reversed(range(n)):
            psi = propagate_step(parts, drive, psi, (k + 1) * dt, -dt)
        assert np.linalg.norm(psi - psi0) < 1e-7

    def test_breakdown_early_termination(self, system8):
        # an exact eigenstate collapses the subspace after one vector
        _, basis, parts = system8
        h = parts.dense(0.0)
        evals, vecs = np.linalg.eigh(h)
        psi = vecs[:, 0].astype(complex)
        out = propagate_step(parts, DriveProfile.constant(0.0), psi, 0.0, 0.01)
        expect = psi * np.exp(-1j * evals[0] * 0.01)
        assert np.abs(out - expect).max() < 1e-10


class TestDensePropagator:
    def test_identity_at_zero(self, system8):
        _, basis, parts = system8
        u = dense_propagator(parts, 0.1, 0.0)
        assert np.abs(u - np.eye(basis.dim)).max() < 1e-12

    def test_semigroup_and_unitarity(self, system8):
        _, basis, parts = system8
        u1 = dense_propagator(parts, 0.2, 0.35)
        u2 = dense_propagator(parts, 0.2, 0.27)
        u3 = dense_propagator(parts, 0.2, 0.62)
        assert np.abs(u1 @ u2 - u3).max() < 1e-9
        assert np.abs(u1.conj().T @ u1 - np.eye(basis.dim)).max() < 1e-10

    def test_dimension_guard(self, p):
        lat = build_lattice("chain", 16)
        basis = enumerate_blockaded(lat)
        parts = build_pxp(lat, basis, p)
        with pytest.raises(CapacityError):
            dense_propagator(parts, 0.0, 1.0)


class TestRunQuench:
    def test_probability_and_norm_conservation(self, p, chain9, chain9_states):
        lat, basis = chain9
        af1, _, _ = chain9_states
        parts = build_rydberg(lat, basis, p)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[basis.index_of(af1)] = 1
        cfg = EvolutionConfig(total_time=0.5, dt=0.002, record_stride=5)
        res = run_quench(lat, basis, parts, DriveProfile.constant(0.0), psi0, cfg)
        assert np.allclose(res.probs.sum(axis=1), 1.0, atol=1e-9)
        assert abs(np.linalg.norm(res.final_state) - 1.0) < 1e-9
        stride_t = cfg.dt * cfg.record_stride
        assert np.allclose(res.times, np.arange(len(res.times)) * stride_t)

    def test_energy_conservation_constant_drive(self, p, system8):
        _, basis, parts = system8
        drive = DriveProfile.constant(0.3 * p.omega)
        off, diag = parts.offdiagonal(), parts.diagonal(drive.delta0)
        psi = random_state(basis.dim, 6)
        e0 = np.vdot(psi, off @ psi + diag * psi).real
        for k in range(1000):
            psi = propagate_step(parts, drive, psi, k * 0.002, 0.002)
        e1 = np.vdot(psi, off @ psi + diag * psi).real
        assert abs(e1 - e0) / abs(e0) < 1e-6

    def test_sublattice_symmetric_ggg(self, p):
        # even ring: a lattice automorphism exchanges the sublattices
        lat = build_lattice("chain", 10, periodic=True)
        basis = enumerate_blockaded(lat)
        parts = build_pxp(lat, basis, p)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[basis.index_of(0)] = 1
        cfg = EvolutionConfig(total_time=0.4, dt=0.002, record_stride=10)
        res = run_quench(lat, basis, parts, DriveProfile.constant(0.0), psi0, cfg,
                         record_probs=False)
        assert np.abs(res.n_a - res.n_b).max() < 1e-9

    def test_scar_revival_frequency_band(self, p, chain9, chain9_states):
        from scarsim.analysis import fit_damped_cosine, imbalance

        lat, basis = chain9
        af1, _, _ = chain9_states
        parts = build_pxp(lat, basis, p)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[basis.index_of(af1)] = 1
        dq = optimal_detuning(lat, p)
        cfg = EvolutionConfig(total_time=1.5, dt=0.002, record_stride=1)
        res = run_quench(lat, basis, parts, DriveProfile.constant(dq), psi0, cfg,
                         record_probs=False)
        fit = fit_damped_cosine(imbalance(res), res.times)
        assert fit.converged
        assert 0.55 <= fit.omega_tilde / p.omega <= 0.75

    def test_drive_resolution_guard_subdivides(self, p):
        # coarse dt with a fast drive must still integrate accurately
        lat = build_lattice("chain", 6)
        basis = enumerate_blockaded(lat)
        parts = build_rydberg(lat, basis, p)
        drive = DriveProfile.cosine(0.55 * p.omega, 0.55 * p.omega, 1.75 * p.omega)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[basis.index_of(0)] = 1
        cfg = EvolutionConfig(total_time=0.1, dt=0.005, record_stride=4)
        res = run_quench(lat, basis, parts, drive, psi0, cfg, record_probs=False)
        # reference with a fine explicit grid
        fine = psi0.copy()
        n = 2000
        dt = 0.1 / n
        for k in range(n):
            fine = propagate_step(parts, drive, fine, k * dt, dt)
        pops = np.abs(fine) ** 2
        shifts = np.arange(6)
        site = pops @ ((basis.states[:, None] >> shifts) & 1).astype(float)
        assert np.abs(res.site_pops[-1] - site).max() < 1e-4

    def test_input_validation(self, p, system8):
        lat, basis, parts = system8
        cfg = EvolutionConfig(total_time=0.1)
        with pytest.raises(ConfigError):
            run_quench(lat, basis, parts, DriveProfile.constant(0.0),
                       np.ones(basis.dim, dtype=complex), cfg)
        with pytest.raises(ConfigError):
            run_quench(lat, basis, parts,
                       DriveProfile.pulsed(theta=math.pi, tau=1.0),
                       random_state(basis.dim, 7), cfg)
        with pytest.raises(ConfigError):
            EvolutionConfig(total_time=1.0, dt=-0.1)
        with pytest.raises(ConfigError):
            EvolutionConfig(total_time=1.0, krylov_dim=2)


class TestReducedDensityMatrix:
    def test_product_state_is_pure(self, chain9, chain9_states):
        _, basis = chain9
        af1, _, _ = chain9_states
        psi = np.zeros(basis.dim, dtype=complex)
        psi[basis.index_of(af1)] = 1
        rho = reduced_density_matrix(psi, basis, (0, 1, 2))
        evals = np.linalg.eigvalsh(rho)
        assert evals[-1] == pytest.approx(1.0, abs=1e-12)
        assert entanglement_entropy(rho) < 1e-12

    def test_single_site_of_af1(self, chain9, chain9_states):
        _, basis = chain9
        af1, _, _ = chain9_states
        psi = np.zeros(basis.dim, dtype=complex)
        psi[basis.index_of(af1)] = 1
        rho = reduced_density_matrix(psi, basis, (0,))
        assert np.allclose(rho, np.diag([0.0, 1.0]), atol=1e-14)

    def test_bell_pair(self):
        lat = build_lattice("chain", 2)
        basis = enumerate_blockaded(lat)
        psi = np.zeros(basis.dim, dtype=complex)
        psi[basis.index_of(0b01)] = 1 / math.sqrt(2)
        psi[basis.index_of(0b10)] = 1 / math.sqrt(2)
        rho = reduced_density_matrix(psi, basis, (0,))
        assert np.allclose(rho, np.diag([0.5, 0.5]), atol=1e-14)
        assert entanglement_entropy(rho) == pytest.approx(math.log(2), rel=1e-12)

    def test_properties_random_states(self, chain9):
        lat, basis = chain9
        for seed, subset in [(0, (0, 1)), (1, (2, 5, 7)), (2, tuple(range(4)))]:
            psi = random_state(basis.dim, seed)
            rho = reduced_density_matrix(psi, basis, subset)
            evals = np.linalg.eigvalsh(rho)
            assert evals.min() > -1e-12
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
            assert np.abs(rho - rho.conj().T).max() < 1e-14
            sub_lat = build_lattice("chain", len(subset))
            max_dim = enumerate_blockaded(sub_lat).dim
            # contiguous chain cuts: entropy bounded by the valid subspace size
            if subset == tuple(range(len(subset))):
                assert entanglement_entropy(rho) <= math.log(max_dim) + 1e-12

    def test_subset_validation(self, chain9):
        _, basis = chain9
        psi = random_state(basis.dim, 3)
        with pytest.raises(ConfigError):
            reduced_density_matrix(psi, basis, ())
        with pytest.raises(ConfigError):
            reduced_density_matrix(psi, basis, (9,))
        with pytest.raises(ConfigError):
            reduced_density_matrix(psi, basis, tuple(range(9)))

    def test_entropy_guards(self):
        with pytest.raises(NumericalError):
            entanglement_entropy(np.diag([1.2, -0.2]))
        assert entanglement_entropy(np.diag([0.5, 0.5])) == pytest.approx(math.log(2))


class TestQuenchCsv:
    def test_round_trip_exact(self, p, chain9, chain9_states):
        lat, basis = chain9
        af1, _, _ = chain9_states
        parts = build_rydberg(lat, basis, p)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[basis.index_of(af1)] = 1
        cfg = EvolutionConfig(total_time=0.2, dt=0.002, record_stride=5)
        res = run_quench(lat, basis, parts, DriveProfile.constant(0.1), psi0, cfg,
                         entropy_cuts=((0, 1, 2, 3),), record_probs=False)
        back = quench_from_csv(quench_to_csv(res))
        assert np.array_equal(back.times, res.times)
        assert np.array_equal(back.site_pops, res.site_pops)
        assert np.array_equal(back.n_a, res.n_a)
        assert np.array_equal(back.entropies, res.entropies)
