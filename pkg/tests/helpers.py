"""Shared builders for the test suite: seeded random chains and states."""
import numpy as np

from mpstomo.network import MatrixProductOperator, MatrixProductState
from mpstomo.oracle import mpo_from_dense, mps_from_dense


def rng(seed):
    return np.random.default_rng(seed)


def random_mps(n, bond=3, seed=0, d=2):
    """Random complex MPS with ragged physical bond profile capped at `bond`."""
    g = rng(seed)
    dims = [1] + [min(bond, d ** k, d ** (n - k)) for k in range(1, n)] + [1]
    sites = tuple(
        g.standard_normal((dims[k], d, dims[k + 1]))
        + 1j * g.standard_normal((dims[k], d, dims[k + 1]))
        for k in range(n)
    )
    return MatrixProductState(sites)


def random_mpo(n, bond=3, seed=0, basis_id="pauli", op_dim=4):
    """Random complex MPO coefficient chain (not Hermitian, not positive)."""
    g = rng(seed)
    dims = [1] + [bond] * (n - 1) + [1]
    sites = tuple(
        g.standard_normal((dims[k], op_dim, dims[k + 1]))
        + 1j * g.standard_normal((dims[k], op_dim, dims[k + 1]))
        for k in range(n)
    )
    return MatrixProductOperator(sites, basis_id)


def random_density_dense(n, seed=0, d=2):
    """Dense random full-rank density matrix (Wishart construction)."""
    g = rng(seed)
    dim = d ** n
    a = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_density_mpo(n, seed=0, max_bond=None):
    """Random density matrix as an exact (or truncated) MPO."""
    rho, _ = mpo_from_dense(random_density_dense(n, seed), max_bond=max_bond)
    return rho


def random_state_vector(n, seed=0, d=2):
    g = rng(seed)
    v = g.standard_normal(d ** n) + 1j * g.standard_normal(d ** n)
    return v / np.linalg.norm(v)


def random_pure_mps(n, seed=0, max_bond=None):
    psi, _ = mps_from_dense(random_state_vector(n, seed), max_bond=max_bond)
    return psi


def kron_chain(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out
