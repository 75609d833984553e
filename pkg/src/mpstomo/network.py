"""Matrix product states and operators on open 1-D qubit chains.

An operator is stored through coefficient tensors with respect to an
orthonormal Hermitian single-site basis: site tensors have shape
(D_k, d*d, D_{k+1}) and the represented operator is

    rho = sum_a  P_1[a_1] ... P_N[a_N]  *  P(a_1) x ... x P(a_N),

with D_1 = D_{N+1} = 1.  States use site tensors of shape (D_k, d, D_{k+1})
over the computational basis.  Because the operator basis is orthonormal,
Hilbert-Schmidt contractions of operators reduce to plain overlap
contractions of their coefficient networks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import OperatorBasis, get_basis
from .errors import BasisMismatchError, DegenerateStateError, DimensionMismatchError


def _as_site_tuple(sites) -> tuple[np.ndarray, ...]:
    out = []
    for s in sites:
        arr = np.ascontiguousarray(s, dtype=complex)
        if arr.ndim != 3:
            raise DimensionMismatchError(f"site tensor must be rank 3, got shape {arr.shape}")
        out.append(arr)
    return tuple(out)


def _check_chain(sites: tuple[np.ndarray, ...], what: str) -> None:
    if not sites:
        raise DimensionMismatchError(f"{what} needs at least one site")
    if sites[0].shape[0] != 1 or sites[-1].shape[2] != 1:
        raise DimensionMismatchError(f"{what} boundary bond dimensions must be 1")
    for k in range(len(sites) - 1):
        if sites[k].shape[2] != sites[k + 1].shape[0]:
            raise DimensionMismatchError(
                f"{what} bond mismatch between sites {k} and {k + 1}: "
                f"{sites[k].shape} vs {sites[k + 1].shape}"
            )
    phys = {s.shape[1] for s in sites}
    if len(phys) != 1:
        raise DimensionMismatchError(f"{what} has mixed physical dimensions {sorted(phys)}")


@dataclass(frozen=True)
class MatrixProductState:
    """Open-boundary MPS; site tensors (D_k, d, D_{k+1})."""

    sites: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", _as_site_tuple(self.sites))
        _check_chain(self.sites, "matrix product state")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def phys_dim(self) -> int:
        return self.sites[0].shape[1]

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(s.shape[0] for s in self.sites) + (1,)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)


@dataclass(frozen=True)
class MatrixProductOperator:
    """Open-boundary MPO coefficient network; site tensors (D_k, d*d, D_{k+1})."""

    sites: tuple[np.ndarray, ...]
    basis_id: str = "pauli"

    def __post_init__(self):
        object.__setattr__(self, "sites", _as_site_tuple(self.sites))
        _check_chain(self.sites, "matrix product operator")
        if self.sites[0].shape[1] != self.basis().op_dim:
            raise DimensionMismatchError(
                f"operator index {self.sites[0].shape[1]} does not match "
                f"basis {self.basis_id!r} of dimension {self.basis().op_dim}"
            )

    def basis(self) -> OperatorBasis:
        return get_basis(self.basis_id)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def phys_dim(self) -> int:
        return self.basis().phys_dim

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(s.shape[0] for s in self.sites) + (1,)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)


def _common_basis(*mpos: MatrixProductOperator) -> OperatorBasis:
    ids = {m.basis_id for m in mpos}
    if len(ids) != 1:
        raise BasisMismatchError(f"operators use different bases: {sorted(ids)}")
    n = {m.n_sites for m in mpos}
    if len(n) != 1:
        raise DimensionMismatchError(f"operators have different site counts: {sorted(n)}")
    return mpos[0].basis()


def expectation(rho: MatrixProductOperator, ops: Sequence[np.ndarray | None]) -> complex:
    """tr[rho * (op_1 x ... x op_N)] for a product observable.

    Entries of ``ops`` may be None for identity.  Cost O(N d^2 D^2).
    """
    if len(ops) != rho.n_sites:
        raise DimensionMismatchError(f"expected {rho.n_sites} factors, got {len(ops)}")
    basis = rho.basis()
    env = np.ones((1,), dtype=complex)
    for site, op in zip(rho.sites, ops):
        w = basis.trace_vec if op is None else basis.weights(np.asarray(op, dtype=complex))
        transfer = np.tensordot(w, site, axes=([0], [1]))
        env = env @ transfer
    return complex(env[0])


def trace(rho: MatrixProductOperator) -> complex:
    return expectation(rho, [None] * rho.n_sites)


def normalize(rho: MatrixProductOperator) -> MatrixProductOperator:
    """Rescale to unit trace, spreading the factor evenly over all sites."""
    t = trace(rho)
    if abs(t) < 1e-300:
        raise DegenerateStateError(f"cannot normalize operator with trace {t}")
    f = t ** (1.0 / rho.n_sites)
    return MatrixProductOperator(tuple(s / f for s in rho.sites), rho.basis_id)


def scale(rho: MatrixProductOperator, c: complex) -> MatrixProductOperator:
    """Multiply by a scalar, spread as c^(1/N) per site (principal root)."""
    f = complex(c) ** (1.0 / rho.n_sites)
    return MatrixProductOperator(tuple(s * f for s in rho.sites), rho.basis_id)


def dagger(rho: MatrixProductOperator) -> MatrixProductOperator:
    """Hermitian adjoint; with a Hermitian basis this conjugates coefficients."""
    return MatrixProductOperator(tuple(s.conj() for s in rho.sites), rho.basis_id)


def multiply(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    """Operator product a*b; bond dimensions multiply (D_a D_b)."""
    basis = _common_basis(a, b)
    c = basis.structure
    sites = []
    for sa, sb in zip(a.sites, b.sites):
        t = np.tensordot(sa, c, axes=([1], [0]))          # (la, ra, b, g)
        t = np.tensordot(t, sb, axes=([2], [1]))          # (la, ra, g, lb, rb)
        t = t.transpose(0, 3, 2, 1, 4)                    # (la, lb, g, ra, rb)
        la, lb, g, ra, rb = t.shape
        sites.append(t.reshape(la * lb, g, ra * rb))
    return MatrixProductOperator(tuple(sites), a.basis_id)


def add(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    """Operator sum a+b as a block direct sum; bond dimensions add."""
    _common_basis(a, b)
    n = a.n_sites
    if n == 1:
        return MatrixProductOperator((a.sites[0] + b.sites[0],), a.basis_id)
    sites = [np.concatenate([a.sites[0], b.sites[0]], axis=2)]
    for k in range(1, n - 1):
        sa, sb = a.sites[k], b.sites[k]
        la, p, ra = sa.shape
        lb, _, rb = sb.shape
        blk = np.zeros((la + lb, p, ra + rb), dtype=complex)
        blk[:la, :, :ra] = sa
        blk[la:, :, ra:] = sb
        sites.append(blk)
    sites.append(np.concatenate([a.sites[-1], b.sites[-1]], axis=0))
    return MatrixProductOperator(tuple(sites), a.basis_id)


def hs_inner(a: MatrixProductOperator, b: MatrixProductOperator) -> complex:
    """Hilbert-Schmidt inner product tr[a† b] via coefficient overlap."""
    _common_basis(a, b)
    env = np.ones((1, 1), dtype=complex)
    for sa, sb in zip(a.sites, b.sites):
        x = np.tensordot(env, sb, axes=([1], [0]))        # (fa, g, rb)
        env = np.tensordot(sa.conj(), x, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def hs_norm_sq(a: MatrixProductOperator) -> float:
    return hs_inner(a, a).real


def product_trace(factors: Sequence[MatrixProductOperator]) -> complex:
    """tr[F_1 F_2 ... F_m] without materializing the product.

    Fuses the physical legs progressively through the basis structure
    constants, keeping one bond leg per factor; intermediates stay of size
    O(prod_j D_j * d^2).
    """
    basis = _common_basis(*factors)
    c = basis.structure
    m = len(factors)
    env = np.ones((1,) * m, dtype=complex)
    n = factors[0].n_sites
    for k in range(n):
        cur = np.tensordot(env, factors[0].sites[k], axes=([0], [0]))
        cur = np.moveaxis(cur, -2, -1)                    # (f2..fm, g1, mu)
        for j in range(1, m):
            cur = np.tensordot(cur, factors[j].sites[k], axes=([0], [0]))
            # legs (f_{j+2}.., g_1..g_j, mu, a, g_{j+1}): the remaining f legs
            # plus the collected g legs always total m-1, so mu sits at m-1
            cur = np.tensordot(cur, c, axes=([m - 1, m], [0, 1]))
        env = np.tensordot(cur, basis.trace_vec, axes=([-1], [0]))
    return complex(env.reshape(()))


def identity_mpo(n: int, coefficient: complex = 1.0, basis_id: str = "pauli") -> MatrixProductOperator:
    """coefficient * identity on n sites, as a bond-dimension-1 MPO."""
    basis = get_basis(basis_id)
    d = basis.phys_dim
    site = np.zeros((1, basis.op_dim, 1), dtype=complex)
    site[0, 0, 0] = np.sqrt(d)
    mpo = MatrixProductOperator((site,) * n, basis_id)
    if coefficient != 1.0:
        mpo = scale(mpo, coefficient)
    return mpo


def product_mpo(ops: Sequence[np.ndarray], basis_id: str = "pauli") -> MatrixProductOperator:
    """The product operator op_1 x ... x op_N as a bond-dimension-1 MPO."""
    basis = get_basis(basis_id)
    sites = []
    for op in ops:
        c = basis.coefficients(np.asarray(op, dtype=complex))
        sites.append(c.reshape(1, basis.op_dim, 1))
    return MatrixProductOperator(tuple(sites), basis_id)


def completely_mixed(n: int, basis_id: str = "pauli") -> MatrixProductOperator:
    """The maximally mixed state 1/d^N with bond dimension 1.

    The per-site identity coefficient is d^(-1/2) so the product traces
    to one.
    """
    basis = get_basis(basis_id)
    site = np.zeros((1, basis.op_dim, 1), dtype=complex)
    site[0, 0, 0] = 1.0 / np.sqrt(basis.phys_dim)
    return MatrixProductOperator((site,) * n, basis_id)


def mps_to_mpo(psi: MatrixProductState, basis_id: str = "pauli") -> MatrixProductOperator:
    """The projector |psi><psi| as an MPO; bond dimensions square."""
    basis = get_basis(basis_id)
    if psi.phys_dim != basis.phys_dim:
        raise DimensionMismatchError("state and basis physical dimensions differ")
    sites = []
    for a in psi.sites:
        t = np.einsum("lsr,mtq,ast->lmarq", a, a.conj(), basis.matrices.conj())
        l, mdim, op, r, q = t.shape
        sites.append(t.reshape(l * mdim, op, r * q))
    return MatrixProductOperator(tuple(sites), basis_id)


def mps_inner(a: MatrixProductState, b: MatrixProductState) -> complex:
    """<a|b>."""
    if a.n_sites != b.n_sites or a.phys_dim != b.phys_dim:
        raise DimensionMismatchError("states are incompatible")
    env = np.ones((1, 1), dtype=complex)
    for sa, sb in zip(a.sites, b.sites):
        x = np.tensordot(env, sb, axes=([1], [0]))
        env = np.tensordot(sa.conj(), x, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def mps_norm_sq(a: MatrixProductState) -> float:
    return mps_inner(a, a).real


def normalize_mps(a: MatrixProductState) -> MatrixProductState:
    nrm = np.sqrt(mps_norm_sq(a))
    if nrm < 1e-150:
        raise DegenerateStateError("cannot normalize a state with vanishing norm")
    f = nrm ** (1.0 / a.n_sites)
    return MatrixProductState(tuple(s / f for s in a.sites))


def expectation_mps(psi: MatrixProductState, ops: Sequence[np.ndarray | None]) -> complex:
    """<psi| op_1 x ... x op_N |psi> for a product observable."""
    if len(ops) != psi.n_sites:
        raise DimensionMismatchError(f"expected {psi.n_sites} factors, got {len(ops)}")
    env = np.ones((1, 1), dtype=complex)
    for site, op in zip(psi.sites, ops):
        x = np.tensordot(env, site, axes=([1], [0]))      # (bra, s, rket)
        if op is not None:
            x = np.tensordot(x, np.asarray(op, dtype=complex), axes=([1], [1]))
            x = x.transpose(0, 2, 1)
        env = np.tensordot(site.conj(), x, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def apply_mpo_to_mps(op: MatrixProductOperator, psi: MatrixProductState) -> MatrixProductState:
    """op |psi>; bond dimensions multiply."""
    if op.n_sites != psi.n_sites:
        raise DimensionMismatchError("operator and state site counts differ")
    basis = op.basis()
    if basis.phys_dim != psi.phys_dim:
        raise DimensionMismatchError("operator and state physical dimensions differ")
    sites = []
    for so, sp in zip(op.sites, psi.sites):
        t = np.tensordot(so, basis.matrices, axes=([1], [0]))   # (a, a', s, s')
        t = np.tensordot(t, sp, axes=([3], [1]))                # (a, a', s, l, r)
        t = t.transpose(0, 3, 2, 1, 4)                          # (a, l, s, a', r)
        a, l, s, a2, r = t.shape
        sites.append(t.reshape(a * l, s, a2 * r))
    return MatrixProductState(tuple(sites))
