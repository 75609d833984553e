"""Gauge fixing and rank truncation for tensor chains.

Both state chains (physical dimension d) and operator chains (physical
dimension d^2 in an orthonormal operator basis) are lists of rank-3 site
tensors, so everything here works on raw site lists and is re-exported
through thin wrappers that preserve the container type.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, ParameterError
from .network import MatrixProductOperator, MatrixProductState

__all__ = [
    "CanonicalForm",
    "canonicalize",
    "canonicalize_mps",
    "svd_truncate",
    "svd_truncate_mps",
]


def _qr_step(sites, k):
    """Left-orthogonalize site k, pushing its weight into site k+1."""
    dl, p, dr = sites[k].shape
    q, r = np.linalg.qr(sites[k].reshape(dl * p, dr))
    sites[k] = np.ascontiguousarray(q.reshape(dl, p, q.shape[1]))
    sites[k + 1] = np.tensordot(r, sites[k + 1], axes=([1], [0]))


def _lq_step(sites, k):
    """Right-orthogonalize site k, pushing its weight into site k-1."""
    dl, p, dr = sites[k].shape
    # LQ via QR of the conjugate transpose: M = L Q with Q Q^H = 1
    q, r = np.linalg.qr(sites[k].reshape(dl, p * dr).conj().T)
    rank = q.shape[1]
    sites[k] = np.ascontiguousarray(q.conj().T.reshape(rank, p, dr))
    sites[k - 1] = np.tensordot(sites[k - 1], r.conj().T, axes=([2], [0]))


def _canonicalize_sites(sites, center):
    sites = [np.asarray(s) for s in sites]
    for k in range(center):
        _qr_step(sites, k)
    for k in range(len(sites) - 1, center, -1):
        _lq_step(sites, k)
    return sites


@dataclass(frozen=True)
class CanonicalForm:
    """A chain in mixed-canonical gauge about ``center``.

    Sites left of the center are left isometries, sites right of it are
    right isometries, so the squared Frobenius norm of the whole chain
    equals that of the center tensor alone.
    """

    sites: tuple
    center: int

    @property
    def norm_sq(self):
        c = self.sites[self.center]
        return float(np.real(np.vdot(c, c)))

    def gauge_errors(self):
        """Max deviation of each off-center site from isometry."""
        errs = []
        for k, s in enumerate(self.sites):
            dl, p, dr = s.shape
            if k < self.center:
                m = s.reshape(dl * p, dr)
                g = m.conj().T @ m
            elif k > self.center:
                m = s.reshape(dl, p * dr)
                g = m @ m.conj().T
            else:
                errs.append(0.0)
                continue
            errs.append(float(np.abs(g - np.eye(g.shape[0])).max()))
        return errs


def canonicalize(op: MatrixProductOperator, center: int = 0) -> CanonicalForm:
    if not 0 <= center < op.n_sites:
        raise ParameterError(f"center {center} outside chain of {op.n_sites} sites")
    sites = _canonicalize_sites(list(op.sites), center)
    return CanonicalForm(sites=tuple(sites), center=center)


def canonicalize_mps(psi: MatrixProductState, center: int = 0) -> CanonicalForm:
    if not 0 <= center < psi.n_sites:
        raise ParameterError(f"center {center} outside chain of {psi.n_sites} sites")
    sites = _canonicalize_sites(list(psi.sites), center)
    return CanonicalForm(sites=tuple(sites), center=center)


def _svd_truncate_sites(sites, max_bond, rel_tol):
    """Sweep left-to-right, truncating each cut by SVD.

    The chain is brought to right-canonical form first so that every
    local singular spectrum is the exact Schmidt spectrum of that cut.
    Returns (new_sites, discarded) where ``discarded`` is the summed
    squared singular values dropped over all cuts, an upper bound on the
    squared Frobenius error of the result.
    """
    n = len(sites)
    sites = _canonicalize_sites(list(sites), 0)
    norm_sq = float(np.real(np.vdot(sites[0], sites[0])))
    if norm_sq <= 0.0:
        raise DegenerateStateError("cannot truncate a chain with zero norm")
    budget = rel_tol * norm_sq / max(n - 1, 1)
    discarded = 0.0
    for k in range(n - 1):
        dl, p, dr = sites[k].shape
        u, s, vh = np.linalg.svd(sites[k].reshape(dl * p, dr), full_matrices=False)
        keep = len(s)
        if rel_tol > 0.0:
            tail = np.cumsum(s[::-1] ** 2)[::-1]  # tail[i] = sum of s[i:]**2
            while keep > 1 and tail[keep - 1] <= budget:
                keep -= 1
        if max_bond is not None:
            keep = min(keep, max_bond)
        keep = max(keep, 1)
        discarded += float(np.sum(s[keep:] ** 2))
        sites[k] = np.ascontiguousarray(u[:, :keep].reshape(dl, p, keep))
        carry = s[:keep, None] * vh[:keep]
        sites[k + 1] = np.tensordot(carry, sites[k + 1], axes=([1], [0]))
    return sites, discarded


def svd_truncate(op: MatrixProductOperator, max_bond=None, rel_tol=0.0):
    """Truncate operator bonds; returns (operator, discarded_weight)."""
    sites, discarded = _svd_truncate_sites(list(op.sites), max_bond, rel_tol)
    return MatrixProductOperator(tuple(sites), op.basis_id), discarded


def svd_truncate_mps(psi: MatrixProductState, max_bond=None, rel_tol=0.0):
    sites, discarded = _svd_truncate_sites(list(psi.sites), max_bond, rel_tol)
    return MatrixProductState(tuple(sites)), discarded
