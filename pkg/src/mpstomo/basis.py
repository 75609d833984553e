"""Orthonormal Hermitian operator bases for single sites.

Matrix product operators in this package store coefficient tensors with
respect to a fixed orthonormal basis of the local operator space,
tr[P(a)† P(b)] = delta_ab.  For qubits this is the normalized Pauli basis
{1, X, Y, Z} / sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class OperatorBasis:
    """A fixed orthonormal Hermitian basis of the d x d operator space.

    matrices   : (d*d, d, d) stacked basis operators, index 0 is 1/sqrt(d)
    structure  : c[a, b, g] = tr[P(g)† P(a) P(b)], the fusion coefficients
                 of operator products in this basis
    trace_vec  : tr[P(a)], used by trace/expectation contractions
    """

    basis_id: str
    matrices: np.ndarray
    structure: np.ndarray = field(repr=False)
    trace_vec: np.ndarray = field(repr=False)

    @property
    def phys_dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def op_dim(self) -> int:
        return self.matrices.shape[0]

    def coefficients(self, op: np.ndarray) -> np.ndarray:
        """Coefficient vector of a single-site operator, c[a] = tr[P(a)† op]."""
        return np.einsum("aij,ij->a", self.matrices.conj(), op)

    def weights(self, op: np.ndarray) -> np.ndarray:
        """Expectation weights tr[op P(a)] used in transfer contractions."""
        return np.einsum("ij,aji->a", op, self.matrices)


def _build(basis_id: str, matrices: np.ndarray) -> OperatorBasis:
    structure = np.einsum("aij,bjk,gik->abg", matrices, matrices, matrices.conj())
    trace_vec = np.einsum("aii->a", matrices)
    matrices.setflags(write=False)
    structure.setflags(write=False)
    trace_vec.setflags(write=False)
    return OperatorBasis(basis_id, matrices, structure, trace_vec)


@lru_cache(maxsize=None)
def get_basis(basis_id: str = "pauli") -> OperatorBasis:
    if basis_id == "pauli":
        mats = np.stack([PAULI_I, PAULI_X, PAULI_Y, PAULI_Z]) / np.sqrt(2.0)
        return _build(basis_id, mats)
    raise ParameterError(f"unknown operator basis {basis_id!r}")
