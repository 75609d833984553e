import numpy as np
import pytest
import scipy.linalg


from mpstomo.basis import PAULI_I, PAULI_Z
from mpstomo.errors import ParameterError
from mpstomo.network import expectation_mps, mps_norm_sq, trace
from mpstomo.oracle import densify
from mpstomo.states import (
    NearestNeighbourHamiltonian,
    ghz_mps,
    ground_state_search,
    random_hamiltonian,
    thermal_state_dense,
)


def test_ghz_two_sites_is_bell_pair():
    vec = densify(ghz_mps(2, phase=0.0))
    want = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    assert np.allclose(vec, want, atol=1e-12)


def test_ghz_amplitudes_and_phase():
    for n in (2, 4, 6):
        phase = 1.1
        vec = densify(ghz_mps(n, phase=phase))
        nz = np.flatnonzero(np.abs(vec) > 1e-14)
        assert len(nz) == 2
        assert np.allclose(np.abs(vec[nz]), 1 / np.sqrt(2), atol=1e-12)
        ratio = vec[nz[1]] / vec[nz[0]]
        assert abs(ratio - np.exp(1j * phase)) < 1e-12
        assert abs(mps_norm_sq(ghz_mps(n, phase)) - 1.0) < 1e-12


def test_ghz_global_expectations():
    from mpstomo.basis import PAULI_X, PAULI_Y
    for phase in (0.0, np.pi / 2, 1.3):
        psi = ghz_mps(4, phase=phase)
        x_all = expectation_mps(psi, [PAULI_X] * 4)
        yx = expectation_mps(psi, [PAULI_Y] + [PAULI_X] * 3)
        assert abs(x_all - np.cos(phase)) < 1e-12
        assert abs(yx - np.sin(phase)) < 1e-12


def test_ghz_bond_dimension_two():
    assert ghz_mps(6).max_bond == 2


def test_ghz_odd_size_rejected():
    with pytest.raises(ParameterError):
        ghz_mps(3)
    with pytest.raises(ParameterError):
        ghz_mps(0)


def test_random_hamiltonian_statistics():
    # off-diagonal real/imag parts of each term should be ~ N(0, 1)
    samples = []
    for seed in range(300):
        h = random_hamiltonian(2, seed=seed)
        t = h.terms[0]
        off = t[np.triu_indices(4, k=1)]
        samples.extend(off.real.tolist())
        samples.extend(off.imag.tolist())
    samples = np.asarray(samples)
    assert abs(samples.mean()) < 0.05
    assert abs(samples.std() - 1.0) < 0.05


def test_hamiltonian_terms_hermitian_and_dense_matches():
    h = random_hamiltonian(4, seed=3)
    assert len(h.terms) == 3
    for t in h.terms:
        assert np.allclose(t, t.conj().T, atol=1e-14)
    dense = h.dense()
    # build independently: embed each 4x4 term at sites (k, k+1)
    want = sum(
        np.kron(np.kron(np.eye(2 ** k), t), np.eye(2 ** (4 - k - 2)))
        for k, t in enumerate(h.terms))
    assert np.allclose(dense, want, atol=1e-12)


def test_thermal_state_matches_expm():
    h = random_hamiltonian(4, seed=5)
    beta = 2.0
    rho, fit_error = thermal_state_dense(h, beta)
    want = scipy.linalg.expm(-beta * h.dense())
    want /= np.trace(want)
    assert np.allclose(densify(rho), want, atol=1e-12)
    assert fit_error < 1e-12
    assert abs(trace(rho) - 1.0) < 1e-12


def test_thermal_state_dense_properties():
    h = random_hamiltonian(3, seed=6)
    rho, _ = thermal_state_dense(h, 0.7)
    dense = densify(rho)
    assert np.allclose(dense, dense.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(dense).min() > -1e-12


def test_thermal_fit_error_monotone_in_bond():
    h = random_hamiltonian(4, seed=7)
    errors = [thermal_state_dense(h, 2.0, max_fit_bond=d)[1]
              for d in (1, 2, 3, 4, 6)]
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_ground_state_field_only_product():
    # H = sum_i Z_i: ground state |1...1>, energy -N, bond 1 suffices
    n = 4
    z_left = np.kron(PAULI_Z, PAULI_I)
    terms = [z_left.copy() for _ in range(n - 1)]
    terms[-1] = terms[-1] + np.kron(PAULI_I, PAULI_Z)
    h = NearestNeighbourHamiltonian(n, tuple(terms))
    result = ground_state_search(h, max_bond=1, seed=0)
    assert abs(result.energy - (-n)) < 1e-9
    vec = densify(result.state)
    assert abs(abs(vec[-1]) - 1.0) < 1e-6      # amplitude on |1...1>


def test_ground_state_variational_bound_and_quality():
    for seed in (0, 1):
        h = random_hamiltonian(5, seed=seed)
        exact = np.linalg.eigvalsh(h.dense()).min()
        result = ground_state_search(h, max_bond=8, seed=seed)
        assert result.energy >= exact - 1e-9
        assert result.energy - exact < 1e-8


def test_ground_state_energies_non_increasing():
    h = random_hamiltonian(4, seed=9)
    result = ground_state_search(h, max_bond=4, seed=2)
    es = result.energies
    assert all(b <= a + 1e-9 for a, b in zip(es, es[1:]))
    assert abs(mps_norm_sq(result.state) - 1.0) < 1e-9


def test_ground_state_deterministic():
    h = random_hamiltonian(4, seed=10)
    a = ground_state_search(h, max_bond=4, seed=3)
    b = ground_state_search(h, max_bond=4, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a.state.sites, b.state.sites))


def test_hamiltonian_validation():
    with pytest.raises(ParameterError):
        NearestNeighbourHamiltonian(3, (np.eye(4),))      # wrong term count
    with pytest.raises(ParameterError):
        bad = np.eye(4) + 1j * np.triu(np.ones((4, 4)), 1)
        NearestNeighbourHamiltonian(2, (bad,))            # not Hermitian
