"""Reference states and Hamiltonians for simulated experiments.

Covers the three families used throughout: GHZ states with a tunable
relative phase, thermal states of random nearest-neighbour Hamiltonians
(built densely, then factorized), and variational ground states found by
a single-site sweep search.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse.linalg

from .canonical import _canonicalize_sites
from .errors import CapabilityError, ParameterError
from .network import MatrixProductState
from .oracle import DENSE_LIMIT, mpo_from_dense

__all__ = [
    "ghz_mps",
    "NearestNeighbourHamiltonian",
    "random_hamiltonian",
    "thermal_state_dense",
    "GroundSearchResult",
    "ground_state_search",
]


def ghz_mps(n: int, phase: float = 0.0) -> MatrixProductState:
    """(|0101..> + e^{i phase} |1010..>)/sqrt(2) with bond dimension 2.

    The two branches are anti-aligned staggered product states, so only
    even chain lengths are supported; the phase sits on the branch that
    starts with |1>.
    """
    if n < 2 or n % 2:
        raise ParameterError(f"chain length must be even and >= 2, got {n}")
    # channel 0 carries the 0101.. branch, channel 1 its complement
    first = np.zeros((1, 2, 2), dtype=complex)
    first[0, 0, 0] = 1.0 / np.sqrt(2.0)
    first[0, 1, 1] = np.exp(1j * phase) / np.sqrt(2.0)
    sites = [first]
    for k in range(1, n - 1):
        bit = k % 2
        mid = np.zeros((2, 2, 2), dtype=complex)
        mid[0, bit, 0] = 1.0
        mid[1, 1 - bit, 1] = 1.0
        sites.append(mid)
    last = np.zeros((2, 2, 1), dtype=complex)
    last[0, 1, 0] = 1.0          # n even: the 0101.. branch ends in 1
    last[1, 0, 0] = 1.0
    sites.append(last)
    return MatrixProductState(tuple(sites))


@dataclass(frozen=True)
class NearestNeighbourHamiltonian:
    """H = sum_k h_k acting on neighbouring pairs (k, k+1)."""

    n_sites: int
    terms: tuple            # n_sites - 1 Hermitian (4, 4) matrices
    seed: int | None = None

    def __post_init__(self):
        terms = tuple(np.asarray(t, dtype=complex) for t in self.terms)
        for t in terms:
            t.setflags(write=False)
        object.__setattr__(self, "terms", terms)
        if len(terms) != self.n_sites - 1:
            raise ParameterError(
                f"{self.n_sites} sites need {self.n_sites - 1} terms, got {len(terms)}")
        if any(t.shape != (4, 4) for t in terms):
            raise ParameterError("every term must be a 4x4 matrix")
        if any(not np.allclose(t, t.conj().T, atol=1e-12) for t in terms):
            raise ParameterError("every term must be Hermitian")

    def dense(self, limit=DENSE_LIMIT):
        if self.n_sites > limit:
            raise CapabilityError(
                f"dense Hamiltonian limited to {limit} sites, got {self.n_sites}")
        dim = 2 ** self.n_sites
        out = np.zeros((dim, dim), dtype=complex)
        for k, t in enumerate(self.terms):
            factors = [np.eye(2 ** k), t, np.eye(2 ** (self.n_sites - k - 2))]
            out += reduce(np.kron, factors)
        return out


def random_hamiltonian(n: int, seed: int) -> NearestNeighbourHamiltonian:
    """Random nearest-neighbour Hamiltonian from the Gaussian Hermitian
    ensemble with unit-variance off-diagonal entries."""
    if n < 2:
        raise ParameterError(f"need at least two sites, got {n}")
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(n - 1):
        a = np.sqrt(2.0) * (rng.standard_normal((4, 4))
                            + 1j * rng.standard_normal((4, 4)))
        terms.append((a + a.conj().T) / 2.0)
    return NearestNeighbourHamiltonian(n, tuple(terms), seed)


def thermal_state_dense(h: NearestNeighbourHamiltonian, beta: float,
                        max_fit_bond=None, limit=DENSE_LIMIT):
    """exp(-beta H)/Z via exact diagonalization, returned in operator
    form; (operator, fit_error)."""
    if beta < 0:
        raise ParameterError(f"inverse temperature must be nonnegative, got {beta}")
    dense = h.dense(limit)
    evals, vecs = np.linalg.eigh(dense)
    w = np.exp(-beta * (evals - evals[0]))
    rho = (vecs * (w / w.sum())) @ vecs.conj().T
    return mpo_from_dense(rho, max_bond=max_fit_bond, limit=limit)


# ---------------------------------------------------------------------------
# variational ground state

def _hamiltonian_w_tensors(h: NearestNeighbourHamiltonian):
    """Operator-valued transfer matrices (Dl, Dr, s_out, s_in) for H.

    Each pair term is split across its bond by SVD of the coefficient
    matrix; channel layout is [term completed, mid-term factors, term
    not started].
    """
    n = h.n_sites
    eye = np.eye(2, dtype=complex)
    xs, ys = [], []
    for t in h.terms:
        m = t.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
        u, s, vh = np.linalg.svd(m)
        r = max(int(np.count_nonzero(s > s[0] * 1e-14)) if s[0] > 0 else 1, 1)
        root = np.sqrt(s[:r])
        xs.append(np.ascontiguousarray(
            (u[:, :r] * root).T.reshape(r, 2, 2)))
        ys.append(np.ascontiguousarray(
            (root[:, None] * vh[:r]).reshape(r, 2, 2)))
    ws = []
    for k in range(n):
        rl = len(ys[k - 1]) if k > 0 else 0
        rr = len(xs[k]) if k < n - 1 else 0
        dl, dr = 2 + rl, 2 + rr
        w = np.zeros((dl, dr, 2, 2), dtype=complex)
        w[0, 0] = eye
        w[dl - 1, dr - 1] = eye
        if k < n - 1:
            w[dl - 1, 1:1 + rr] = xs[k]
        if k > 0:
            w[1:1 + rl, 0] = ys[k - 1]
        ws.append(w)
    ws[0] = ws[0][-1:]
    ws[-1] = ws[-1][:, :1]
    return ws


def _env_left(env, a, w):
    x = np.tensordot(env, a, axes=([2], [0]))              # (b, wl, t, k')
    x = np.tensordot(x, w, axes=([1, 2], [0, 3]))          # (b, k', wr, s)
    out = np.tensordot(a.conj(), x, axes=([0, 1], [0, 3]))  # (b', k', wr)
    return out.transpose(0, 2, 1)


def _env_right(env, a, w):
    x = np.tensordot(a, env, axes=([2], [2]))              # (k, t, b, wr)
    x = np.tensordot(x, w, axes=([3, 1], [1, 3]))          # (k, b, wl, s)
    out = np.tensordot(a.conj(), x, axes=([2, 1], [1, 3]))  # (b, k, wl)
    return out.transpose(0, 2, 1)


def _solve_site(lenv, w, renv, v0):
    """Lowest eigenpair of the effective single-site Hamiltonian."""
    dl, _, kl = lenv.shape
    dr, _, kr = renv.shape
    dim = kl * 2 * kr

    def matvec(v):
        x = np.tensordot(lenv, v.reshape(kl, 2, kr), axes=([2], [0]))
        x = np.tensordot(x, w, axes=([1, 2], [0, 3]))      # (bl, kr, wr, s)
        x = np.tensordot(x, renv, axes=([2, 1], [1, 2]))   # (bl, s, br)
        return x.reshape(-1)

    if dim <= 256:
        heff = np.tensordot(lenv, w, axes=([1], [0]))      # (bl, kl, wr, s, t)
        heff = np.tensordot(heff, renv, axes=([2], [1]))   # (bl, kl, s, t, br, kr)
        heff = heff.transpose(0, 2, 4, 1, 3, 5).reshape(dim, dim)
        evals, vecs = np.linalg.eigh(heff)
        return float(evals[0]), vecs[:, 0].reshape(kl, 2, kr)
    op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    evals, vecs = scipy.sparse.linalg.eigsh(op, k=1, which="SA", v0=v0.reshape(-1))
    return float(evals[0]), vecs[:, 0].reshape(kl, 2, kr)


@dataclass(frozen=True)
class GroundSearchResult:
    state: MatrixProductState
    energy: float
    energies: tuple          # one entry per local update, non-increasing


def ground_state_search(h: NearestNeighbourHamiltonian, max_bond: int,
                        sweeps: int = 12, seed: int = 0) -> GroundSearchResult:
    """Minimize <psi|H|psi> over states with bonds <= max_bond by
    sweeping exact single-site updates. The bond profile is fixed up
    front (single-site updates cannot grow it), so ``max_bond`` large
    enough for the chain length makes the ansatz lossless."""
    n = h.n_sites
    if n < 2:
        raise ParameterError("need at least two sites")
    if max_bond < 1 or sweeps < 1:
        raise ParameterError("max_bond and sweeps must be positive")
    rng = np.random.default_rng(seed)
    bonds = [min(max_bond, 2 ** k, 2 ** (n - k)) for k in range(n + 1)]
    sites = [rng.standard_normal((bonds[k], 2, bonds[k + 1]))
             + 1j * rng.standard_normal((bonds[k], 2, bonds[k + 1]))
             for k in range(n)]
    ws = _hamiltonian_w_tensors(h)

    # right-canonicalize so the first update site is the center
    sites = _canonicalize_sites(sites, 0)
    sites[0] /= np.linalg.norm(sites[0])

    renv = [None] * (n + 1)
    renv[n] = np.ones((1, 1, 1), dtype=complex)
    for k in range(n - 1, -1, -1):
        renv[k] = _env_right(renv[k + 1], sites[k], ws[k])
    lenv = [None] * (n + 1)
    lenv[0] = np.ones((1, 1, 1), dtype=complex)

    energies = []
    prev = None
    for _ in range(sweeps):
        for k in range(n - 1):
            e, v = _solve_site(lenv[k], ws[k], renv[k + 1], sites[k])
            energies.append(e)
            q, r = np.linalg.qr(v.reshape(-1, v.shape[2]))
            sites[k] = q.reshape(v.shape[0], 2, q.shape[1])
            sites[k + 1] = np.tensordot(r, sites[k + 1], axes=([1], [0]))
            lenv[k + 1] = _env_left(lenv[k], sites[k], ws[k])
        for k in range(n - 1, 0, -1):
            e, v = _solve_site(lenv[k], ws[k], renv[k + 1], sites[k])
            energies.append(e)
            q, r = np.linalg.qr(v.reshape(v.shape[0], -1).conj().T)
            sites[k] = q.conj().T.reshape(q.shape[1], 2, v.shape[2])
            sites[k - 1] = np.tensordot(sites[k - 1], r.conj().T, axes=([2], [0]))
            renv[k] = _env_right(renv[k + 1], sites[k], ws[k])
        e, v = _solve_site(lenv[0], ws[0], renv[1], sites[0])
        energies.append(e)
        sites[0] = v / np.linalg.norm(v)
        if prev is not None and abs(prev - e) <= 1e-12 * max(1.0, abs(e)):
            break
        prev = e
    return GroundSearchResult(MatrixProductState(tuple(sites)),
                              energies[-1], tuple(energies))
