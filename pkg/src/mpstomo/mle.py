"""Maximum-likelihood reconstruction by the R rho R fixed-point update.

Each iteration builds R from the measurement record and the outcome
probabilities of the current estimate, then replaces the estimate by the
trace-normalized compression of R rho R. The operator product is taken
in two stages, each compressed back to the bond cap against a warm
start, so nothing larger than (cap x R-bond) is ever materialized:

    V  ~ compress(rho R),  guess rho
    T  ~ compress(R V),    guess V
    rho' = T / tr T

For pure-state mode the update is |psi'> ~ R|psi> renormalized. With
exact frequencies the fixed point is R = identity and the state is left
unchanged up to compression noise. Diluting R toward the identity
((1 + eps R)/(1 + eps)) makes every step monotone in likelihood at the
cost of proportionally slower convergence.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .compress import CompressOptions, compress, compress_mps
from .errors import CompressionAbort, ParameterError
from .network import (
    MatrixProductState,
    apply_mpo_to_mps,
    completely_mixed,
    mps_norm_sq,
    multiply,
    normalize,
    normalize_mps,
    trace,
)
from .povm import dilute, r_operator, setting_probabilities

__all__ = [
    "ReconstructionConfig",
    "StepReport",
    "IterationTrace",
    "ReconstructionResult",
    "log_likelihood",
    "mixed_step",
    "pure_step",
    "reconstruct",
    "random_product_state",
]


@dataclass(frozen=True)
class ReconstructionConfig:
    max_bond: int
    max_iterations: int = 1000
    pure: bool = False
    dilution: float = 0.0        # 0 disables; (1 + eps R)/(1 + eps) otherwise
    prob_floor: float = 1e-12
    loglik_tol: float = 1e-10    # relative change of log-likelihood to stop at
    seed: int = 0                # initial state for pure mode
    compress_options: CompressOptions = field(default_factory=CompressOptions)

    def __post_init__(self):
        if self.max_bond < 1:
            raise ParameterError(f"max_bond must be positive, got {self.max_bond}")
        if self.max_iterations < 1:
            raise ParameterError("need at least one iteration")
        if self.dilution < 0:
            raise ParameterError(f"dilution must be nonnegative, got {self.dilution}")


@dataclass(frozen=True)
class StepReport:
    log_likelihood: float        # of the *input* state
    compression_error: float     # summed relative error of the stage compressions
    trace_deviation: float       # |tr - 1| (or |norm^2 - 1|) before renormalizing
    clamped: int
    max_bond: int


class IterationTrace:
    """Per-iteration convergence log."""

    def __init__(self):
        self.iterations = []
        self.log_likelihood = []
        self.compression_error = []
        self.trace_deviation = []
        self.wall_ms = []

    def append(self, iteration, report: StepReport, ms):
        self.iterations.append(iteration)
        self.log_likelihood.append(report.log_likelihood)
        self.compression_error.append(report.compression_error)
        self.trace_deviation.append(report.trace_deviation)
        self.wall_ms.append(ms)

    def __len__(self):
        return len(self.iterations)

    def rows(self):
        return list(zip(self.iterations, self.log_likelihood,
                        self.compression_error, self.trace_deviation,
                        self.wall_ms))


@dataclass(frozen=True)
class ReconstructionResult:
    state: object                # MatrixProductOperator or MatrixProductState
    status: str                  # "converged" | "budget_exhausted" | "aborted"
    iterations: int
    final_log_likelihood: float
    trace: IterationTrace
    config: ReconstructionConfig

    @property
    def converged(self):
        return self.status == "converged"


def _log_likelihood_from(record, probabilities, floor):
    total = 0.0
    for e, p in zip(record.entries, probabilities):
        active = e.counts > 0
        pa = np.asarray(p, dtype=float)[active]
        if floor > 0:
            pa = np.maximum(pa, floor)
        if np.any(pa <= 0):
            return -np.inf
        total += float(np.sum(e.counts[active] * np.log(pa)))
    return total


def log_likelihood(record, state, floor=0.0):
    """sum_i n_i log p_i under ``state``; -inf if an observed outcome has
    probability <= 0 and no floor is given."""
    probs = setting_probabilities(state, [e.setting for e in record.entries])
    return _log_likelihood_from(record, probs, floor)


def _build_r(state, record, cfg, probabilities):
    build = r_operator(record, state, floor=cfg.prob_floor,
                       probabilities=probabilities)
    if cfg.dilution > 0:
        build = dilute(build, cfg.dilution)
    return build


def mixed_step(state, record, cfg: ReconstructionConfig, probabilities=None):
    """One R rho R update of a density-operator estimate.

    Returns (new_state, StepReport). Raises CompressionAbort when a stage
    compression cannot represent its target within the abort threshold.
    """
    if probabilities is None:
        probabilities = setting_probabilities(state, [e.setting for e in record.entries])
    ll = _log_likelihood_from(record, probabilities, cfg.prob_floor)
    build = _build_r(state, record, cfg, probabilities)
    v, rep1 = compress(multiply(state, build.operator), cfg.max_bond,
                       cfg.compress_options, guess=state, two_site="always")
    t, rep2 = compress(multiply(build.operator, v), cfg.max_bond,
                       cfg.compress_options, guess=v, two_site="always")
    deviation = abs(trace(t) - 1.0)
    new = normalize(t)
    return new, StepReport(ll, rep1.relative_error + rep2.relative_error,
                           deviation, build.clamped, new.max_bond)


def pure_step(state, record, cfg: ReconstructionConfig, probabilities=None):
    """One |psi> -> R|psi> update of a pure-state estimate."""
    if probabilities is None:
        probabilities = setting_probabilities(state, [e.setting for e in record.entries])
    ll = _log_likelihood_from(record, probabilities, cfg.prob_floor)
    build = _build_r(state, record, cfg, probabilities)
    target = apply_mpo_to_mps(build.operator, state)
    phi, rep = compress_mps(target, cfg.max_bond, cfg.compress_options,
                            guess=state, two_site="always")
    deviation = abs(mps_norm_sq(phi) - 1.0)
    new = normalize_mps(phi)
    return new, StepReport(ll, rep.relative_error, deviation,
                           build.clamped, new.max_bond)


def random_product_state(n, seed):
    """Bond-1 state with each site drawn uniformly on the Bloch sphere."""
    rng = np.random.default_rng(seed)
    sites = []
    for _ in range(n):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        sites.append((v / np.linalg.norm(v)).reshape(1, 2, 1))
    return MatrixProductState(tuple(sites))


def reconstruct(record, n_sites, cfg: ReconstructionConfig) -> ReconstructionResult:
    """Iterate the fixed-point update from a maximally mixed (or random
    product, in pure mode) start until the log-likelihood stalls, the
    iteration budget runs out, or a compression aborts.

    An abort returns the last usable estimate with status "aborted"
    rather than raising, so partial progress stays inspectable.
    """
    if cfg.pure:
        state = random_product_state(n_sites, cfg.seed)
        step = pure_step
    else:
        state = completely_mixed(n_sites)
        step = mixed_step

    trace_log = IterationTrace()
    status = "budget_exhausted"
    prev_ll = None
    for it in range(1, cfg.max_iterations + 1):
        t0 = time.perf_counter()
        try:
            state, report = step(state, record, cfg)
        except CompressionAbort:
            status = "aborted"
            break
        trace_log.append(it, report, (time.perf_counter() - t0) * 1e3)
        ll = report.log_likelihood
        if prev_ll is not None and abs(ll - prev_ll) <= cfg.loglik_tol * max(1.0, abs(ll)):
            status = "converged"
            break
        prev_ll = ll

    final_ll = log_likelihood(record, state, cfg.prob_floor)
    return ReconstructionResult(state=state, status=status,
                                iterations=len(trace_log),
                                final_log_likelihood=final_ll,
                                trace=trace_log, config=cfg)
