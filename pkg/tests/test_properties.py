"""Randomized invariant checks over small chains.

Each property draws a seed (and sometimes a size) and builds the actual
inputs with numpy's generator, so shrinking happens on the seed while
the tensor data stays well-conditioned.
"""
import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from helpers import random_density_mpo, random_mpo, random_pure_mps, rng

from mpstomo.canonical import canonicalize
from mpstomo.compress import CompressOptions, compress
from mpstomo.metrics import fidelity_pure_mixed, hs_distance
from mpstomo.mle import ReconstructionConfig, log_likelihood, mixed_step
from mpstomo.network import (
    add,
    dagger,
    expectation,
    hs_norm_sq,
    mps_to_mpo,
    multiply,
    normalize,
    trace,
)
from mpstomo.oracle import densify
from mpstomo.povm import LocalBlockPovm, PovmSet, r_operator
from mpstomo.sim import exact_distributions, measure

seeds = st.integers(min_value=0, max_value=2**31 - 1)
sizes = st.integers(min_value=2, max_value=4)

relaxed = settings(deadline=None, max_examples=25,
                   suppress_health_check=[HealthCheck.too_slow])
sparse = settings(deadline=None, max_examples=10,
                  suppress_health_check=[HealthCheck.too_slow])

_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def _random_unitary(dim, g):
    q, r = np.linalg.qr(g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


@relaxed
@given(seed=seeds, n=sizes)
def test_gauge_insertion_leaves_observables_alone(seed, n):
    op = random_mpo(n, bond=3, seed=seed)
    g = rng(seed + 1)
    k = int(g.integers(0, n - 1))
    dim = op.sites[k].shape[2]
    u = _random_unitary(dim, g)
    sites = list(op.sites)
    sites[k] = np.tensordot(sites[k], u, axes=([2], [0]))
    sites[k + 1] = np.tensordot(u.conj().T, sites[k + 1], axes=([1], [0]))
    gauged = type(op)(tuple(sites), op.basis_id)
    assert np.allclose(densify(gauged), densify(op), atol=1e-10)
    assert abs(trace(gauged) - trace(op)) < 1e-10
    ops = [_PAULI_Z] + [None] * (n - 1)
    assert abs(expectation(gauged, ops) - expectation(op, ops)) < 1e-10
    assert abs(hs_norm_sq(gauged) - hs_norm_sq(op)) < 1e-10 * max(1.0, hs_norm_sq(op))


@relaxed
@given(seed=seeds, n=sizes)
def test_add_and_multiply_match_dense(seed, n):
    a = random_mpo(n, bond=2, seed=seed)
    b = random_mpo(n, bond=2, seed=seed + 1)
    da, db = densify(a), densify(b)
    assert np.allclose(densify(add(a, b)), da + db, atol=1e-9)
    assert np.allclose(densify(multiply(a, b)), da @ db, atol=1e-9)


@relaxed
@given(seed=seeds, n=sizes)
def test_normalize_is_idempotent(seed, n):
    op = random_density_mpo(n, seed=seed)
    once = normalize(op)
    twice = normalize(once)
    assert abs(trace(once) - 1.0) < 1e-12
    assert np.allclose(densify(once), densify(twice), atol=1e-12)


@relaxed
@given(seed=seeds, n=sizes)
def test_hermitian_sandwich_stays_hermitian(seed, n):
    a = random_mpo(n, bond=2, seed=seed)
    b = random_mpo(n, bond=2, seed=seed + 1)
    h1, h2 = add(a, dagger(a)), add(b, dagger(b))
    d = densify(multiply(h1, multiply(h2, h1)))
    assert np.allclose(d, d.conj().T, atol=1e-10)


@relaxed
@given(seed=seeds, n=sizes, center=st.integers(min_value=0, max_value=3))
def test_canonical_norm_equals_dense_purity(seed, n, center):
    assume(center < n)
    op = random_density_mpo(n, seed=seed)
    form = canonicalize(op, center=center)
    dense = densify(op)
    assert abs(form.norm_sq - np.linalg.norm(dense) ** 2) < 1e-10
    assert max(form.gauge_errors()) < 1e-12


@sparse
@given(seed=seeds, n=sizes)
def test_compression_error_shrinks_sweep_by_sweep(seed, n):
    target = random_mpo(n, bond=4, seed=seed)
    _, report = compress(target, 2, CompressOptions(abort_threshold=1.0))
    errors = report.per_sweep_errors
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
    assert report.final_norm_error >= -1e-12


@relaxed
@given(n=sizes, r=st.integers(min_value=1, max_value=3))
def test_every_setting_sums_to_identity(n, r):
    assume(r <= n)
    from mpstomo.oracle import dense_elements
    for setting in LocalBlockPovm(n, r).settings():
        total = sum(dense_elements(setting, n))
        assert np.allclose(total, np.eye(2 ** n), atol=1e-12)


@sparse
@given(seed=seeds)
def test_r_operator_is_hermitian_for_any_counts(seed):
    rho = random_density_mpo(3, seed=seed)
    povm = PovmSet(LocalBlockPovm(3, 2))
    record = measure(rho, povm, shots=30, seed=seed + 1)
    build = r_operator(record, rho)
    d = densify(build.operator)
    assert np.allclose(d, d.conj().T, atol=1e-10)


@sparse
@given(seed=seeds)
def test_exact_frequencies_make_r_the_identity(seed):
    rho = random_density_mpo(3, seed=seed)
    povm = PovmSet(LocalBlockPovm(3, 2))
    record = measure(rho, povm, shots=None)
    build = r_operator(record, rho)
    assert np.allclose(densify(build.operator), np.eye(8), atol=1e-9)


@relaxed
@given(seed=seeds, shots=st.integers(min_value=1, max_value=300))
def test_sampling_is_seeded_and_conserves_shots(seed, shots):
    rho = random_density_mpo(2, seed=seed)
    povm = PovmSet(LocalBlockPovm(2, 2))
    a = measure(rho, povm, shots, seed=seed)
    b = measure(rho, povm, shots, seed=seed)
    for ea, eb in zip(a.entries, b.entries):
        assert np.array_equal(ea.counts, eb.counts)
        assert ea.counts.sum() == shots
        assert (ea.counts >= 0).all()


@relaxed
@given(seed=seeds, n=sizes)
def test_distributions_are_normalized(seed, n):
    rho = random_density_mpo(n, seed=seed)
    povm = PovmSet(LocalBlockPovm(n, 2))
    for d in exact_distributions(rho, povm):
        assert d.probabilities.min() >= 0
        assert abs(d.probabilities.sum() - 1.0) < 1e-10


@sparse
@given(seed=seeds)
def test_log_likelihood_of_counts_is_nonpositive(seed):
    rho = random_density_mpo(3, seed=seed)
    povm = PovmSet(LocalBlockPovm(3, 2))
    record = measure(rho, povm, shots=40, seed=seed + 2)
    assert log_likelihood(record, rho) <= 1e-12


@sparse
@given(seed=seeds)
def test_metric_ranges(seed):
    psi = random_pure_mps(3, seed=seed)
    rho = random_density_mpo(3, seed=seed + 1)
    assert hs_distance(rho, random_density_mpo(3, seed=seed + 2)) >= 0
    f = fidelity_pure_mixed(psi, rho)
    assert 0 <= f <= 1 + 1e-9
    assert hs_distance(mps_to_mpo(psi), mps_to_mpo(psi)) < 1e-12


@sparse
@given(seed=seeds)
def test_mixed_step_keeps_iterates_physical(seed):
    rho = random_density_mpo(3, seed=seed)
    povm = PovmSet(LocalBlockPovm(3, 2))
    record = measure(rho, povm, shots=60, seed=seed + 3)
    cfg = ReconstructionConfig(max_bond=16)
    state, _ = mixed_step(rho, record, cfg)
    d = densify(state)
    assert abs(np.trace(d) - 1.0) < 1e-10
    assert np.linalg.eigvalsh((d + d.conj().T) / 2).min() > -1e-9
