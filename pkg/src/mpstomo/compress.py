"""Alternating-least-squares compression of tensor chains.

Given a target chain (state or operator coefficients) and a bond cap,
find the closest chain with bonds <= max_bond in Frobenius norm. The
guess is kept in mixed-canonical gauge throughout, so every local update
is the exact optimum for that site and the squared error after an update
is ||target||^2 - ||B||^2 with B the freshly updated center tensor. That
makes the per-update (and hence per-sweep) error sequence non-increasing.

Single-site updates cannot change bond dimensions; a two-site sweep
merges neighbours, updates the pair, and splits by truncated SVD, which
lets a low-rank warm start grow toward the cap instead of being locked
to its initial ranks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import _canonicalize_sites
from .errors import CompressionAbort, DegenerateStateError, ParameterError
from .network import MatrixProductOperator, MatrixProductState

__all__ = [
    "CompressOptions",
    "CompressionReport",
    "compress",
    "compress_two_site",
    "compress_mps",
]

# relative singular-value floor for two-site splits; keeps ranks minimal
# without ever discarding weight that matters at double precision
_SPLIT_FLOOR = 1e-14


@dataclass(frozen=True)
class CompressOptions:
    tol: float = 1e-8            # stop when the error change per sweep, relative
                                 # to ||target||^2, drops below this
    max_sweeps: int = 50
    abort_threshold: float = 1e-2  # final error / ||target||^2 above this aborts


@dataclass(frozen=True)
class CompressionReport:
    final_norm_error: float      # ||target - result||^2, absolute
    target_norm_sq: float
    per_sweep_errors: tuple = ()
    sweeps: int = 0
    converged: bool = False
    max_bond: int = 1

    @property
    def relative_error(self):
        return self.final_norm_error / self.target_norm_sq


def _chain_norm_sq(sites):
    env = np.ones((1, 1), dtype=complex)
    for s in sites:
        x = np.tensordot(env, s, axes=([1], [0]))
        env = np.tensordot(s.conj(), x, axes=([0, 1], [0, 1]))
    return float(np.real(env[0, 0]))


def _transfer_right(target_site, guess_site, renv):
    """Renv over sites k..n-1 -> k has legs (target_bond, guess_bond)."""
    x = np.tensordot(target_site, renv, axes=([2], [0]))
    return np.tensordot(x, guess_site.conj(), axes=([1, 2], [1, 2]))


def _als(target, norm_sq, guess, max_bond, opts, two_site):
    """Core sweeper over raw site lists. Returns (sites, report)."""
    n = len(target)
    if norm_sq <= 0.0:
        raise DegenerateStateError("cannot compress a chain with zero norm")
    guess = _canonicalize_sites(list(guess), 0)

    renv = [None] * (n + 1)
    renv[n] = np.ones((1, 1), dtype=complex)
    for k in range(n - 1, -1, -1):
        renv[k] = _transfer_right(target[k], guess[k], renv[k + 1])
    lenv = [None] * (n + 1)
    lenv[0] = np.ones((1, 1), dtype=complex)

    per_sweep = []
    err = None
    converged = False
    for sweep in range(max(1, opts.max_sweeps)):
        grow = two_site == "always" or (two_site == "first" and sweep == 0)
        # left-to-right half: update sites, leave center at n-1
        if grow and n > 1:
            for k in range(n - 1):
                x = np.tensordot(lenv[k], target[k], axes=([1], [0]))
                y = np.tensordot(x, target[k + 1], axes=([2], [0]))
                m = np.tensordot(y, renv[k + 2], axes=([3], [0]))
                gl, p, p2, gr = m.shape
                u, s, vh = np.linalg.svd(m.reshape(gl * p, p2 * gr), full_matrices=False)
                keep = int(np.count_nonzero(s > s[0] * _SPLIT_FLOOR)) if s[0] > 0 else 1
                keep = max(1, min(keep, max_bond))
                err = max(norm_sq - float(np.sum(s[:keep] ** 2)), 0.0)
                guess[k] = np.ascontiguousarray(u[:, :keep].reshape(gl, p, keep))
                guess[k + 1] = np.ascontiguousarray(
                    (s[:keep, None] * vh[:keep]).reshape(keep, p2, gr))
                lenv[k + 1] = np.tensordot(guess[k].conj(), x, axes=([0, 1], [0, 1]))
        else:
            for k in range(n):
                x = np.tensordot(lenv[k], target[k], axes=([1], [0]))
                b = np.tensordot(x, renv[k + 1], axes=([2], [0]))
                err = max(norm_sq - float(np.real(np.vdot(b, b))), 0.0)
                if k == n - 1:
                    guess[k] = b
                    break
                gl, p, gr = b.shape
                q, _ = np.linalg.qr(b.reshape(gl * p, gr))
                guess[k] = np.ascontiguousarray(q.reshape(gl, p, q.shape[1]))
                lenv[k + 1] = np.tensordot(guess[k].conj(), x, axes=([0, 1], [0, 1]))
        # right-to-left half: back to center 0, refreshing renv on the way
        for k in range(n - 1, -1, -1):
            x = np.tensordot(target[k], renv[k + 1], axes=([2], [0]))
            b = np.tensordot(lenv[k], x, axes=([1], [0]))
            err = max(norm_sq - float(np.real(np.vdot(b, b))), 0.0)
            if k == 0:
                guess[k] = b
                break
            gl, p, gr = b.shape
            q, _ = np.linalg.qr(b.reshape(gl, p * gr).conj().T)
            rank = q.shape[1]
            guess[k] = np.ascontiguousarray(q.conj().T.reshape(rank, p, gr))
            renv[k] = np.tensordot(x, guess[k].conj(), axes=([1, 2], [1, 2]))

        prev = per_sweep[-1] if per_sweep else None
        per_sweep.append(err)
        if err <= 1e-14 * norm_sq or (
                prev is not None and abs(prev - err) <= opts.tol * norm_sq):
            converged = True
            break

    report = CompressionReport(
        final_norm_error=err,
        target_norm_sq=norm_sq,
        per_sweep_errors=tuple(per_sweep),
        sweeps=len(per_sweep),
        converged=converged,
        max_bond=max(s.shape[0] for s in guess[1:]) if n > 1 else 1,
    )
    if report.relative_error > opts.abort_threshold:
        raise CompressionAbort(
            f"compression stalled at relative error {report.relative_error:.3e} "
            f"(threshold {opts.abort_threshold:.1e}, max_bond {max_bond})",
            report=report)
    return guess, report


def _default_guess(sites, max_bond):
    from .canonical import _svd_truncate_sites
    guess, _ = _svd_truncate_sites(list(sites), max_bond, 0.0)
    return guess


def _check_args(max_bond, guess, target):
    if max_bond < 1:
        raise ParameterError(f"max_bond must be positive, got {max_bond}")
    if guess is not None and len(guess.sites) != len(target.sites):
        raise ParameterError("guess and target have different lengths")


def compress(target: MatrixProductOperator, max_bond: int,
             options: CompressOptions | None = None, *,
             guess: MatrixProductOperator | None = None,
             two_site: str = "never"):
    """Compress an operator chain to bonds <= max_bond.

    Returns (operator, report). The initial guess defaults to an SVD
    truncation of the target; passing a warm ``guess`` (e.g. the result
    of the previous outer iteration) is much cheaper when the target
    changes slowly. Warm starts should be combined with
    ``two_site="first"`` so the guess can grow bonds it does not have
    yet. Raises CompressionAbort when the final relative error exceeds
    ``options.abort_threshold``.
    """
    _check_args(max_bond, guess, target)
    opts = options or CompressOptions()
    norm_sq = _chain_norm_sq(target.sites)
    init = list(guess.sites) if guess is not None else _default_guess(target.sites, max_bond)
    sites, report = _als(list(target.sites), norm_sq, init, max_bond, opts, two_site)
    return MatrixProductOperator(tuple(sites), target.basis_id), report


def compress_two_site(target: MatrixProductOperator, max_bond: int,
                      options: CompressOptions | None = None, *,
                      guess: MatrixProductOperator | None = None):
    """compress() with rank-adaptive two-site updates on every sweep."""
    return compress(target, max_bond, options, guess=guess, two_site="always")


def compress_mps(target: MatrixProductState, max_bond: int,
                 options: CompressOptions | None = None, *,
                 guess: MatrixProductState | None = None,
                 two_site: str = "never"):
    """Compress a state chain to bonds <= max_bond; returns (state, report)."""
    _check_args(max_bond, guess, target)
    opts = options or CompressOptions()
    norm_sq = _chain_norm_sq(target.sites)
    init = list(guess.sites) if guess is not None else _default_guess(target.sites, max_bond)
    sites, report = _als(list(target.sites), norm_sq, init, max_bond, opts, two_site)
    return MatrixProductState(tuple(sites)), report
