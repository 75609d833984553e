"""Local block POVMs, measurement records, and likelihood-gradient operators.

The measurement model covers every contiguous block of ``block_len``
sites: for each block and each Pauli-axis word over the block, the
outcomes are the joint +-1 eigenvalue patterns, i.e. projective
measurement of the word on that block and nothing elsewhere. An optional
pair of global settings adds the two interference observables that pin
the relative phase of a GHZ component; their elements carry weight 1/2
each so the four of them still sum to the identity.

From a record of counts and the outcome probabilities under the current
estimate, ``r_operator`` assembles

    R = (1/M) sum_i  n_i / p_i  Pi_i

as a matrix product operator, building one operator-valued transfer
matrix per site whose channels track how much of a block has been
emitted so far, then truncating the ranks that carry no weight.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .basis import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, get_basis
from .canonical import svd_truncate
from .errors import DimensionMismatchError, ParameterError
from .network import (
    MatrixProductOperator,
    MatrixProductState,
    add,
    identity_mpo,
    product_mpo,
    scale,
)

__all__ = [
    "AXES",
    "PROJECTORS",
    "Setting",
    "LocalBlockPovm",
    "GlobalGhzPovm",
    "PovmSet",
    "SettingRecord",
    "MeasurementRecord",
    "exact_record",
    "setting_probabilities",
    "ROperatorBuild",
    "r_operator",
    "dilute",
]

AXES = "XYZ"
_SIGMA = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

# single-site eigenprojectors (1 +- sigma)/2, indexed a = 2*axis + bit
# with bit 0 the +1 eigenvector; order X+, X-, Y+, Y-, Z+, Z-
PROJECTORS = np.stack([
    (PAULI_I + sign * _SIGMA[ax]) / 2.0
    for ax in AXES for sign in (+1.0, -1.0)
])
PROJECTORS.setflags(write=False)


@dataclass(frozen=True)
class Setting:
    """One measurement configuration with a fixed outcome list.

    ``element_weight`` relates POVM elements to the within-setting
    outcome distribution: q_j = element_weight * tr[Pi_j rho]. Local
    settings have weight 1 (their elements already sum to the identity);
    each global setting covers only half the identity, so weight 2.
    """

    kind: str                 # "local" | "global"
    block: int | None         # first site of the block, local only
    label: str                # axis word ("XZY"...) or "X" / "YX"
    n_outcomes: int
    element_weight: float

    @property
    def key(self):
        return (self.kind, self.block, self.label)


def _axis_labels(r):
    return ["".join(w) for w in itertools.product(AXES, repeat=r)]


@dataclass(frozen=True)
class LocalBlockPovm:
    """All contiguous ``block_len``-site Pauli-word measurements."""

    n_sites: int
    block_len: int

    def __post_init__(self):
        if not 1 <= self.block_len <= self.n_sites:
            raise ParameterError(
                f"block length {self.block_len} invalid for {self.n_sites} sites")

    @property
    def n_blocks(self):
        return self.n_sites - self.block_len + 1

    @property
    def labels(self):
        return _axis_labels(self.block_len)

    def settings(self):
        return tuple(
            Setting("local", k, w, 2 ** self.block_len, 1.0)
            for k in range(self.n_blocks) for w in self.labels)


@dataclass(frozen=True)
class GlobalGhzPovm:
    """The two phase-sensitive global settings X..X and YX..X."""

    n_sites: int

    def __post_init__(self):
        if self.n_sites < 2:
            raise ParameterError("global settings need at least two sites")

    def settings(self):
        return (Setting("global", None, "X", 2, 2.0),
                Setting("global", None, "YX", 2, 2.0))


@dataclass(frozen=True)
class PovmSet:
    local: LocalBlockPovm
    ghz: GlobalGhzPovm | None = None

    def __post_init__(self):
        if self.ghz is not None and self.ghz.n_sites != self.local.n_sites:
            raise DimensionMismatchError("local and global parts disagree on size")

    @property
    def n_sites(self):
        return self.local.n_sites

    @property
    def block_len(self):
        return self.local.block_len

    def settings(self):
        out = self.local.settings()
        if self.ghz is not None:
            out = out + self.ghz.settings()
        return out


@dataclass(frozen=True)
class SettingRecord:
    """Counts for one setting; ``shots = inf`` stores the exact outcome
    distribution in ``counts`` instead of integers."""

    setting: Setting
    counts: np.ndarray
    shots: float

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (self.setting.n_outcomes,):
            raise DimensionMismatchError(
                f"expected {self.setting.n_outcomes} counts for {self.setting.key}, "
                f"got shape {counts.shape}")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise ParameterError(f"invalid counts for {self.setting.key}")


@dataclass(frozen=True)
class MeasurementRecord:
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ParameterError("empty measurement record")
        finite = {np.isfinite(e.shots) for e in self.entries}
        if len(finite) != 1:
            raise ParameterError("cannot mix sampled and exact entries in one record")

    @property
    def exact(self):
        return not np.isfinite(self.entries[0].shots)

    @property
    def total_shots(self):
        """The M in the weights n_i/(M p_i).

        In exact mode every setting stores its outcome distribution, so
        each setting carries unit weight and M is the number of settings.
        """
        if self.exact:
            return float(len(self.entries))
        return float(sum(e.shots for e in self.entries))


def exact_record(settings, probabilities):
    """Record holding exact within-setting outcome distributions."""
    entries = []
    for s, p in zip(settings, probabilities):
        entries.append(SettingRecord(s, np.asarray(p) * s.element_weight, np.inf))
    return MeasurementRecord(tuple(entries))


# ---------------------------------------------------------------------------
# outcome probabilities

def _global_ops(label, n):
    return [_SIGMA[label[min(k, len(label) - 1)]] for k in range(n)]


def _mpo_tables(state, blocks, r):
    """Per-block element probabilities, shape (3^r, 2^r), for an operator."""
    basis = state.basis()
    sites = state.sites
    n = len(sites)
    proj_w = np.stack([basis.weights(p) for p in PROJECTORS])   # (6, op)
    pe = [np.tensordot(proj_w, s, axes=([1], [1])) for s in sites]  # (6, l, r)
    id_t = [np.tensordot(basis.trace_vec, s, axes=([0], [1])) for s in sites]
    left = [np.ones((1,), dtype=complex)]
    for k in range(n):
        left.append(left[k] @ id_t[k])
    right = [None] * (n + 1)
    right[n] = np.ones((1,), dtype=complex)
    for k in range(n - 1, -1, -1):
        right[k] = id_t[k] @ right[k + 1]
    tables = {}
    for k0 in blocks:
        x = np.tensordot(left[k0], pe[k0], axes=([0], [1]))     # (6, bond)
        for j in range(1, r):
            x = np.tensordot(x, pe[k0 + j], axes=([-1], [1]))   # (6,..,6, bond)
        t = np.tensordot(x, right[k0 + r], axes=([-1], [0]))    # (6,)*r
        tables[k0] = _tuple_table_to_outcomes(t)
    return tables


def _mps_tables(state, blocks, r):
    sites = state.sites
    n = len(sites)
    pe = []
    id_t = []
    for s in sites:
        dl, _, dr = s.shape
        x = np.tensordot(PROJECTORS, s, axes=([2], [1]))        # (6, s, l, r)
        y = np.tensordot(s.conj(), x, axes=([1], [1]))          # (l', r', 6, l, r)
        pe.append(y.transpose(2, 0, 3, 1, 4).reshape(6, dl * dl, dr * dr))
        t = np.tensordot(s.conj(), s, axes=([1], [1]))          # (l', r', l, r)
        id_t.append(t.transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr))
    left = [np.ones((1,), dtype=complex)]
    for k in range(n):
        left.append(left[k] @ id_t[k])
    right = [None] * (n + 1)
    right[n] = np.ones((1,), dtype=complex)
    for k in range(n - 1, -1, -1):
        right[k] = id_t[k] @ right[k + 1]
    tables = {}
    for k0 in blocks:
        x = np.tensordot(left[k0], pe[k0], axes=([0], [1]))
        for j in range(1, r):
            x = np.tensordot(x, pe[k0 + j], axes=([-1], [1]))
        t = np.tensordot(x, right[k0 + r], axes=([-1], [0]))
        tables[k0] = _tuple_table_to_outcomes(t)
    return tables


def _tuple_table_to_outcomes(t):
    """(6,)*r tuple table -> (3^r, 2^r) with bases lexicographic over XYZ
    words and outcome bits most-significant-first, bit 0 = +1."""
    r = t.ndim
    t = t.reshape((3, 2) * r)
    order = tuple(range(0, 2 * r, 2)) + tuple(range(1, 2 * r, 2))
    return np.ascontiguousarray(t.transpose(order).reshape(3 ** r, 2 ** r).real)


def _label_rank(label):
    rank = 0
    for ch in label:
        rank = rank * 3 + AXES.index(ch)
    return rank


def setting_probabilities(state, settings):
    """Element probabilities tr[Pi_i rho] (or <psi|Pi_i|psi>) per setting.

    Returns a list of float arrays aligned with ``settings``. Values are
    raw up to dropping the vanishing imaginary part: small negative
    entries from truncated iterates are passed through so callers can
    apply their own floors.
    """
    is_mps = isinstance(state, MatrixProductState)
    n = state.n_sites
    local = [s for s in settings if s.kind == "local"]
    lens = {len(s.label) for s in local}
    if len(lens) > 1:
        raise ParameterError(f"mixed block lengths in settings: {sorted(lens)}")
    tables = {}
    if local:
        r = lens.pop()
        blocks = sorted({s.block for s in local})
        if blocks[0] < 0 or blocks[-1] + r > n:
            raise DimensionMismatchError("setting block outside the chain")
        tables = (_mps_tables if is_mps else _mpo_tables)(state, blocks, r)
    out = []
    for s in settings:
        if s.kind == "local":
            out.append(tables[s.block][_label_rank(s.label)].copy())
        elif s.kind == "global":
            ops = _global_ops(s.label, n)
            if is_mps:
                from .network import expectation_mps
                t = expectation_mps(state, ops).real
            else:
                from .network import expectation
                t = expectation(state, ops).real
            out.append(np.array([(1.0 + t) / 4.0, (1.0 - t) / 4.0]))
        else:
            raise ParameterError(f"unknown setting kind {s.kind!r}")
    return out


# ---------------------------------------------------------------------------
# R-operator assembly

@dataclass(frozen=True)
class ROperatorBuild:
    """The assembled R operator plus build diagnostics."""

    operator: MatrixProductOperator
    raw_max_bond: int
    clamped: int              # outcomes with counts but probability at/under the floor
    floor: float
    dilution: float = 0.0


def _entry_weights(entries, probabilities, total, floor):
    """w_i = n_i/(M max(p_i, floor)); returns (weights list, clamp count)."""
    weights = []
    clamped = 0
    for e, p in zip(entries, probabilities):
        p = np.asarray(p, dtype=float)
        n = e.counts
        hit = (n > 0) & (p < floor)
        clamped += int(np.count_nonzero(hit))
        w = np.where(n > 0, n / (total * np.maximum(p, floor)), 0.0)
        weights.append(w)
    return weights, clamped


def _block_weight_tensors(entries, weights, r):
    """Regroup per-setting outcome weights into per-block (6,)*r tensors."""
    rows = {}
    for e, w in zip(entries, weights):
        rows.setdefault(e.setting.block, {})[_label_rank(e.setting.label)] = w
    tensors = {}
    for k0, by_label in rows.items():
        table = np.zeros((3 ** r, 2 ** r))
        for i, w in by_label.items():
            table[i] = w
        t = table.reshape((3,) * r + (2,) * r)
        order = sum(((j, j + r) for j in range(r)), ())
        tensors[k0] = np.ascontiguousarray(t.transpose(order).reshape((6,) * r))
    return tensors


def _assemble_local_sites(n, r, block_tensors, basis):
    """Operator-valued transfer matrices -> coefficient site tensors.

    Channel layout per bond: 0 = block fully emitted, then pending states
    ordered by emission depth and remaining-axis tuple, last = block not
    started yet. Bond dimension is 2 + sum_{j=1}^{r-1} 6^j.
    """
    done = 0
    offsets = {}
    nxt = 1
    for j in range(1, r):
        offsets[j] = nxt
        nxt += 6 ** (r - j)
    bond = nxt + 1
    start = bond - 1
    eye = np.eye(2, dtype=complex)
    mats = []
    for k in range(n):
        m = np.zeros((bond, bond, 2, 2), dtype=complex)
        m[done, done] = eye
        m[start, start] = eye
        w = block_tensors.get(k)
        if w is not None:
            q = np.tensordot(w, PROJECTORS, axes=([0], [0]))  # ((6,)*(r-1), 2, 2)
            if r == 1:
                m[start, done] = q
            else:
                q = q.reshape(6 ** (r - 1), 2, 2)
                for i in range(6 ** (r - 1)):
                    m[start, offsets[1] + i] = q[i]
        for j in range(1, r):
            stride = 6 ** (r - j - 1)
            for i in range(6 ** (r - j)):
                head = i // stride
                dst = done if j == r - 1 else offsets[j + 1] + i % stride
                m[offsets[j] + i, dst] = PROJECTORS[head]
        mats.append(m)
    mats[0] = mats[0][start:start + 1]
    mats[-1] = mats[-1][:, done:done + 1]
    sites = [np.einsum("lrij,aij->lar", m, basis.matrices.conj()) for m in mats]
    return sites, (bond if n > 1 else 1)


def _global_part(n, entries, weights, basis_id):
    """s0*1 + c1*X..X + c2*YX..X as a bond-2 operator."""
    coeff = {e.setting.label: w for e, w in zip(entries, weights)}
    wx = coeff.get("X", np.zeros(2))
    wyx = coeff.get("YX", np.zeros(2))
    s0 = (wx[0] + wx[1] + wyx[0] + wyx[1]) / 4.0
    c1 = (wx[0] - wx[1]) / 4.0
    c2 = (wyx[0] - wyx[1]) / 4.0
    string = [c1 * PAULI_X + c2 * PAULI_Y] + [PAULI_X] * (n - 1)
    return add(identity_mpo(n, s0, basis_id),
               product_mpo(string, basis_id))


def r_operator(record, state, floor=1e-12, probabilities=None,
               rank_tol=1e-10, basis_id="pauli"):
    """Build R = (1/M) sum_i n_i/p_i Pi_i for the given record and estimate.

    Probabilities are taken from ``probabilities`` (aligned with
    ``record.entries``) or computed from ``state``. Probabilities under
    ``floor`` are clamped there and counted. The local part is assembled
    at its raw structural bond and then cut back to numerical rank
    (relative discarded weight ``rank_tol``); the global part adds
    exactly 2 to the bond.
    """
    n = state.n_sites
    if probabilities is None:
        probabilities = setting_probabilities(state, [e.setting for e in record.entries])
    if all(np.all(e.counts == 0) for e in record.entries):
        raise ParameterError("measurement record has no counts")
    total = record.total_shots
    weights, clamped = _entry_weights(record.entries, probabilities, total, floor)

    local_idx = [i for i, e in enumerate(record.entries) if e.setting.kind == "local"]
    global_idx = [i for i, e in enumerate(record.entries) if e.setting.kind == "global"]

    parts = []
    raw = 1
    if local_idx:
        entries = [record.entries[i] for i in local_idx]
        r = len(entries[0].setting.label)
        tensors = _block_weight_tensors(entries, [weights[i] for i in local_idx], r)
        sites, raw = _assemble_local_sites(n, r, tensors, get_basis(basis_id))
        rough = MatrixProductOperator(tuple(sites), basis_id)
        cut, _ = svd_truncate(rough, rel_tol=rank_tol)
        parts.append(cut)
    if global_idx:
        entries = [record.entries[i] for i in global_idx]
        parts.append(_global_part(n, entries, [weights[i] for i in global_idx], basis_id))

    op = parts[0]
    for extra in parts[1:]:
        op = add(op, extra)
    return ROperatorBuild(operator=op, raw_max_bond=raw, clamped=clamped, floor=floor)


def dilute(build: ROperatorBuild, epsilon: float) -> ROperatorBuild:
    """(1 + eps*R)/(1 + eps): a contraction toward the identity that keeps
    every likelihood step monotone at the cost of slower progress."""
    if epsilon <= 0:
        raise ParameterError(f"dilution strength must be positive, got {epsilon}")
    op = build.operator
    n = op.n_sites
    mixed = add(identity_mpo(n, 1.0 / (1.0 + epsilon), op.basis_id),
                scale(op, epsilon / (1.0 + epsilon)))
    return ROperatorBuild(operator=mixed, raw_max_bond=build.raw_max_bond,
                          clamped=build.clamped, floor=build.floor,
                          dilution=epsilon)
