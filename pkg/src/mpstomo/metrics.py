"""Distances between true and reconstructed states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, DimensionMismatchError
from .network import (
    MatrixProductOperator,
    MatrixProductState,
    hs_inner,
    hs_norm_sq,
    mps_inner,
    mps_norm_sq,
)

__all__ = [
    "hs_distance",
    "fidelity_pure_pure",
    "fidelity_pure_mixed",
    "ComparisonResult",
    "compare",
]


def hs_distance(truth: MatrixProductOperator, estimate: MatrixProductOperator) -> float:
    """Squared Hilbert-Schmidt distance relative to ||truth||^2:

        ||truth - estimate||^2 / ||truth||^2
    """
    ref = hs_norm_sq(truth)
    if ref <= 0:
        raise DegenerateStateError("reference state has zero norm")
    val = ref - 2.0 * hs_inner(truth, estimate).real + hs_norm_sq(estimate)
    return max(val, 0.0) / ref


def fidelity_pure_pure(truth: MatrixProductState, estimate: MatrixProductState) -> float:
    """|<truth|estimate>|^2 for normalized states."""
    n1 = mps_norm_sq(truth)
    n2 = mps_norm_sq(estimate)
    if n1 <= 0 or n2 <= 0:
        raise DegenerateStateError("cannot compare states with zero norm")
    return abs(mps_inner(truth, estimate)) ** 2 / (n1 * n2)


def fidelity_pure_mixed(truth: MatrixProductState, estimate: MatrixProductOperator) -> float:
    """<truth| rho |truth> for a normalized pure reference."""
    if truth.n_sites != estimate.n_sites:
        raise DimensionMismatchError("states have different lengths")
    basis = estimate.basis()
    n1 = mps_norm_sq(truth)
    if n1 <= 0:
        raise DegenerateStateError("reference state has zero norm")
    env = np.ones((1, 1, 1), dtype=complex)
    for a, r in zip(truth.sites, estimate.sites):
        env = np.einsum("bak,bsp,aoq,ost,ktr->pqr", env, a.conj(), r,
                        basis.matrices, a, optimize=True)
    return abs(complex(env[0, 0, 0])) / n1


@dataclass(frozen=True)
class ComparisonResult:
    kind: str                    # "mixed-mixed" | "pure-pure" | "pure-mixed"
    hs_distance: float | None = None
    fidelity: float | None = None


def compare(truth, estimate) -> ComparisonResult:
    """Dispatch on the two state kinds and compute whatever applies."""
    t_pure = isinstance(truth, MatrixProductState)
    e_pure = isinstance(estimate, MatrixProductState)
    if t_pure and e_pure:
        return ComparisonResult("pure-pure", fidelity=fidelity_pure_pure(truth, estimate))
    if t_pure and not e_pure:
        return ComparisonResult("pure-mixed", fidelity=fidelity_pure_mixed(truth, estimate))
    if not t_pure and not e_pure:
        return ComparisonResult("mixed-mixed", hs_distance=hs_distance(truth, estimate))
    raise DimensionMismatchError(
        "cannot compare a mixed reference against a pure estimate; "
        "convert the estimate with mps_to_mpo first")
