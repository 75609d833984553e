"""Dense reference implementations for small chains.

Everything here works on full 2^N-dimensional vectors and matrices with
no truncation, no probability floors and no cleverness, so the tensor
network code can be checked against an independent path. Guarded by a
site-count limit because memory grows as 4^N.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

from .basis import get_basis
from .errors import CapabilityError, ParameterError, StateValidityError
from .network import MatrixProductOperator, MatrixProductState
from .povm import AXES, PROJECTORS, _global_ops

__all__ = [
    "DENSE_LIMIT",
    "densify",
    "mps_from_dense",
    "mpo_from_dense",
    "dense_elements",
    "dense_setting_probabilities",
    "dense_log_likelihood",
    "dense_r_operator",
    "dense_mle_step",
    "dense_pure_step",
]

DENSE_LIMIT = 12

# relative singular-value floor marking numerical rank in exact factorizations
_RANK_FLOOR = 1e-14


def _check_limit(n, limit):
    if n > limit:
        raise CapabilityError(
            f"dense path limited to {limit} sites, got {n}; "
            "raise `limit` explicitly if you really want this")


def densify(obj, limit=DENSE_LIMIT):
    """Expand an MPS to its state vector or an MPO to its full matrix."""
    n = obj.n_sites
    _check_limit(n, limit)
    if isinstance(obj, MatrixProductState):
        cum = np.ones((1,), dtype=complex)
        for s in obj.sites:
            cum = np.tensordot(cum, s, axes=([-1], [0]))
        return np.ascontiguousarray(cum.reshape(-1))
    if isinstance(obj, MatrixProductOperator):
        basis = obj.basis()
        d = basis.phys_dim
        cum = np.ones((1,), dtype=complex)
        for s in obj.sites:
            op = np.tensordot(s, basis.matrices, axes=([1], [0]))  # (l, r, i, j)
            op = op.transpose(0, 2, 3, 1).reshape(s.shape[0], d * d, s.shape[2])
            cum = np.tensordot(cum, op, axes=([-1], [0]))
        cum = cum.reshape((d, d) * n)
        perm = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
        return np.ascontiguousarray(cum.transpose(perm).reshape(d ** n, d ** n))
    raise ParameterError(f"cannot densify {type(obj).__name__}")


def _sites_from_tensor(t, p, max_bond):
    """Split an (p,)*n tensor into site tensors by successive SVD."""
    n = t.ndim
    sites = []
    discarded = 0.0
    m = t.reshape(p, -1)
    bond = 1
    for _ in range(n - 1):
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = int(np.count_nonzero(s > s[0] * _RANK_FLOOR)) if s[0] > 0 else 1
        if max_bond is not None:
            keep = min(keep, max_bond)
        keep = max(keep, 1)
        discarded += float(np.sum(s[keep:] ** 2))
        sites.append(u[:, :keep].reshape(bond, p, keep))
        bond = keep
        m = (s[:keep, None] * vh[:keep]).reshape(bond * p, -1)
    sites.append(m.reshape(bond, p, 1))
    return sites, discarded


def mps_from_dense(vec, d=2, max_bond=None, limit=DENSE_LIMIT):
    """Exact (up to max_bond) MPS from a state vector.

    Returns (state, discarded) with ``discarded`` the total squared
    Schmidt weight dropped to bond caps.
    """
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    n = round(np.log(vec.size) / np.log(d))
    if d ** n != vec.size:
        raise ParameterError(f"vector of size {vec.size} is not a {d}-level chain")
    _check_limit(n, limit)
    sites, discarded = _sites_from_tensor(vec.reshape((d,) * n), d, max_bond)
    return MatrixProductState(tuple(sites)), discarded


def mpo_from_dense(mat, basis_id="pauli", max_bond=None, limit=DENSE_LIMIT):
    """Exact (up to max_bond) MPO from a dense operator.

    Returns (operator, fit_error); ``fit_error`` is the summed squared
    singular weight discarded across all cuts, an upper bound on the
    squared Hilbert-Schmidt error of the fit.
    """
    basis = get_basis(basis_id)
    d = basis.phys_dim
    mat = np.asarray(mat, dtype=complex)
    dim = mat.shape[0]
    if mat.shape != (dim, dim):
        raise ParameterError(f"operator must be square, got {mat.shape}")
    n = round(np.log(dim) / np.log(d))
    if d ** n != dim:
        raise ParameterError(f"dimension {dim} is not a {d}-level chain")
    _check_limit(n, limit)
    t = mat.reshape((d, d) * n)
    perm = sum(((k, n + k) for k in range(n)), ())
    t = t.transpose(perm).reshape((d * d,) * n)
    bflat = basis.matrices.reshape(basis.op_dim, d * d)
    for _ in range(n):
        t = np.tensordot(t, bflat.conj(), axes=([0], [1]))
    sites, fit_error = _sites_from_tensor(t, basis.op_dim, max_bond)
    return MatrixProductOperator(tuple(sites), basis_id), fit_error


# ---------------------------------------------------------------------------
# dense measurement model

def _kron(mats):
    return reduce(np.kron, mats)


def dense_elements(setting, n):
    """POVM elements of one setting as full matrices, outcome order
    matching the tensor network engine."""
    if setting.kind == "local":
        r = len(setting.label)
        axes = [AXES.index(c) for c in setting.label]
        out = []
        for j in range(2 ** r):
            bits = [(j >> (r - 1 - i)) & 1 for i in range(r)]
            factors = [np.eye(2 ** setting.block)]
            factors += [PROJECTORS[2 * axes[i] + bits[i]] for i in range(r)]
            factors += [np.eye(2 ** (n - setting.block - r))]
            out.append(_kron(factors))
        return out
    if setting.kind == "global":
        string = _kron(_global_ops(setting.label, n))
        eye = np.eye(2 ** n)
        return [(eye + string) / 4.0, (eye - string) / 4.0]
    raise ParameterError(f"unknown setting kind {setting.kind!r}")


def dense_setting_probabilities(settings, rho):
    """tr[Pi_i rho] per setting, as float arrays."""
    rho = np.asarray(rho, dtype=complex)
    n = round(np.log(rho.shape[0]) / np.log(2))
    out = []
    for s in settings:
        out.append(np.array([np.trace(e @ rho).real for e in dense_elements(s, n)]))
    return out


def dense_log_likelihood(record, rho):
    """sum_i n_i log p_i; -inf when an observed outcome has p <= 0."""
    probs = dense_setting_probabilities([e.setting for e in record.entries], rho)
    total = 0.0
    for e, p in zip(record.entries, probs):
        active = e.counts > 0
        if np.any(p[active] <= 0):
            return -np.inf
        total += float(np.sum(e.counts[active] * np.log(p[active])))
    return total


def dense_r_operator(record, rho):
    """R = (1/M) sum_i n_i/p_i Pi_i, deliberately without probability
    floors: a zero-probability observed outcome fails loudly here."""
    rho = np.asarray(rho, dtype=complex)
    n = round(np.log(rho.shape[0]) / np.log(2))
    total = record.total_shots
    out = np.zeros_like(rho)
    for e in record.entries:
        elements = dense_elements(e.setting, n)
        for count, element in zip(e.counts, elements):
            if count == 0:
                continue
            p = np.trace(element @ rho).real
            if p <= 0:
                raise StateValidityError(
                    f"observed outcome with probability {p} in {e.setting.key}")
            out += (count / (total * p)) * element
    return out


def dense_mle_step(rho, record):
    """One fixed-point update rho -> R rho R / tr, no truncation."""
    r = dense_r_operator(record, rho)
    new = r @ rho @ r
    return new / np.trace(new).real, r


def dense_pure_step(psi, record):
    """|psi> -> R|psi> / norm for a pure-state iteration."""
    rho = np.outer(psi, psi.conj())
    r = dense_r_operator(record, rho)
    new = r @ psi
    return new / np.linalg.norm(new), r
