"""Simulated measurement runs against a known state.

Produces per-setting outcome distributions from a state (tensor network
form) and draws multinomial counts from them with a counter-based
generator, so a (state, povm, shots, seed) tuple always yields the same
record. ``shots=None`` records the exact distributions instead, which
downstream code treats as the infinite-statistics limit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StateValidityError
from .povm import (
    MeasurementRecord,
    PovmSet,
    SettingRecord,
    setting_probabilities,
)

__all__ = [
    "SettingDistribution",
    "exact_distributions",
    "sample_record",
    "measure",
    "total_shots",
]

# negative probabilities no larger than this are treated as truncation
# dust and clamped to zero; anything worse means the state is broken
_NEGATIVE_TOL = 1e-8


@dataclass(frozen=True)
class SettingDistribution:
    setting: object
    probabilities: np.ndarray   # within-setting outcome distribution, sums to 1

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)


def exact_distributions(state, povm: PovmSet):
    """Outcome distributions q_j = element_weight * tr[Pi_j rho] per setting."""
    settings = povm.settings()
    elems = setting_probabilities(state, settings)
    out = []
    for s, p in zip(settings, elems):
        q = p * s.element_weight
        low = q.min()
        if low < -_NEGATIVE_TOL:
            raise StateValidityError(
                f"outcome probability {low} in setting {s.key}; "
                "the state is not close enough to a density operator")
        q = np.maximum(q, 0.0)
        total = q.sum()
        if not 1 - 1e-6 < total < 1 + 1e-6:
            raise StateValidityError(
                f"outcome distribution of {s.key} sums to {total}")
        out.append(SettingDistribution(s, q / total))
    return out


def sample_record(distributions, shots, seed):
    """Draw ``shots`` outcomes per setting by inverse-CDF sampling."""
    if not shots or shots < 1:
        raise ParameterError(f"shots per setting must be positive, got {shots}")
    rng = np.random.Generator(np.random.Philox(seed))
    entries = []
    for dist in distributions:
        cum = np.cumsum(dist.probabilities)
        u = rng.random(int(shots))
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(cum) - 1)
        counts = np.bincount(idx, minlength=len(cum)).astype(float)
        entries.append(SettingRecord(dist.setting, counts, float(shots)))
    return MeasurementRecord(tuple(entries))


def measure(state, povm: PovmSet, shots, seed=0):
    """Full simulated run; ``shots=None`` stores exact distributions."""
    dists = exact_distributions(state, povm)
    if shots is None:
        entries = [SettingRecord(d.setting, d.probabilities, np.inf) for d in dists]
        return MeasurementRecord(tuple(entries))
    return sample_record(dists, shots, seed)


def total_shots(povm: PovmSet, shots):
    """Total sample count M = shots * number of settings."""
    return float(shots) * len(povm.settings())
