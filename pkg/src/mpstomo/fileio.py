"""File formats: tensor chains, measurement counts, traces, Hamiltonians.

Tensor files are a single JSON header line (shapes and metadata)
followed by the raw little-endian complex128 site tensors, so states
round-trip bit-exactly. Everything else is plain JSON or CSV. All
writers are deterministic: the same objects produce the same bytes.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .network import MatrixProductOperator, MatrixProductState
from .povm import (
    GlobalGhzPovm,
    LocalBlockPovm,
    MeasurementRecord,
    PovmSet,
    SettingRecord,
)
from .states import NearestNeighbourHamiltonian

__all__ = [
    "save_tensors",
    "load_tensors",
    "save_counts",
    "load_counts",
    "save_trace_csv",
    "load_trace_csv",
    "save_hamiltonian",
    "load_hamiltonian",
    "ExperimentManifest",
    "save_manifest",
    "load_manifest",
]

_TENSOR_FORMAT = "mpstomo-tensors"
_COUNTS_FORMAT = "mpstomo-counts"
_HAMILTONIAN_FORMAT = "mpstomo-hamiltonian"
_MANIFEST_FORMAT = "mpstomo-manifest"


def _dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _require(cond, message):
    if not cond:
        raise ParameterError(message)


def save_tensors(path, obj, meta=None):
    """Write an MPS/MPO as one header line plus raw complex128 data."""
    if isinstance(obj, MatrixProductState):
        kind, basis = "mps", None
    elif isinstance(obj, MatrixProductOperator):
        kind, basis = "mpo", obj.basis_id
    else:
        raise ParameterError(f"cannot save {type(obj).__name__}")
    header = {
        "format": _TENSOR_FORMAT,
        "version": 1,
        "kind": kind,
        "n": obj.n_sites,
        "basis": basis,
        "shapes": [list(s.shape) for s in obj.sites],
        "meta": meta or {},
    }
    blob = b"".join(np.ascontiguousarray(s, dtype="<c16").tobytes() for s in obj.sites)
    Path(path).write_bytes(_dump(header).encode() + b"\n" + blob)


def load_tensors(path):
    """Returns (state_or_operator, meta)."""
    data = Path(path).read_bytes()
    cut = data.find(b"\n")
    _require(cut > 0, f"{path}: missing tensor file header")
    try:
        header = json.loads(data[:cut])
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: bad tensor file header: {exc}") from None
    _require(header.get("format") == _TENSOR_FORMAT, f"{path}: not a tensor file")
    offset = cut + 1
    expected = sum(int(np.prod(shape)) for shape in header["shapes"]) * 16
    _require(len(data) - offset == expected, f"{path}: trailing or missing tensor data")
    sites = []
    for shape in header["shapes"]:
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<c16", count=count, offset=offset)
        sites.append(arr.reshape(shape).copy())
        offset += count * 16
    if header["kind"] == "mps":
        obj = MatrixProductState(tuple(sites))
    elif header["kind"] == "mpo":
        obj = MatrixProductOperator(tuple(sites), header["basis"])
    else:
        raise ParameterError(f"{path}: unknown kind {header['kind']!r}")
    return obj, header.get("meta", {})


def _povm_name(povm: PovmSet):
    return "local+ghz" if povm.ghz is not None else "local"


def _povm_from_name(name, n, block_len):
    local = LocalBlockPovm(n, block_len)
    if name == "local":
        return PovmSet(local, None)
    if name == "local+ghz":
        return PovmSet(local, GlobalGhzPovm(n))
    raise ParameterError(f"unknown measurement set {name!r}")


def save_counts(path, record: MeasurementRecord, povm: PovmSet, meta=None):
    """Measurement record as JSON, settings in the povm's canonical order."""
    expected = povm.settings()
    _require(tuple(e.setting for e in record.entries) == expected,
             "record settings do not match the measurement set")
    shots = "inf" if record.exact else int(record.entries[0].shots)
    doc = {
        "format": _COUNTS_FORMAT,
        "version": 1,
        "n": povm.n_sites,
        "block_len": povm.block_len,
        "povm": _povm_name(povm),
        "shots": shots,
        "meta": meta or {},
        "settings": [
            {"kind": e.setting.kind, "block": e.setting.block,
             "label": e.setting.label, "counts": e.counts.tolist()}
            for e in record.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def load_counts(path):
    """Returns (record, povm, meta)."""
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParameterError(f"{path}: bad counts file: {exc}") from None
    _require(doc.get("format") == _COUNTS_FORMAT, f"{path}: not a counts file")
    povm = _povm_from_name(doc["povm"], doc["n"], doc["block_len"])
    shots = np.inf if doc["shots"] == "inf" else float(doc["shots"])
    expected = povm.settings()
    raw = doc["settings"]
    _require(len(raw) == len(expected),
             f"{path}: expected {len(expected)} settings, found {len(raw)}")
    entries = []
    for s, r in zip(expected, raw):
        _require((r["kind"], r["block"], r["label"]) == s.key,
                 f"{path}: setting {r} out of order, expected {s.key}")
        entries.append(SettingRecord(s, np.asarray(r["counts"], dtype=float), shots))
    return MeasurementRecord(tuple(entries)), povm, doc.get("meta", {})


_TRACE_COLUMNS = ("iter", "logLik", "compressionError", "traceDeviation", "ms")


def save_trace_csv(path, trace):
    """Iteration trace as CSV with one row per iteration."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TRACE_COLUMNS)
        for row in trace.rows():
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def load_trace_csv(path):
    """Returns a dict of column name -> list of values."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        _require(header == _TRACE_COLUMNS, f"{path}: unexpected trace columns {header}")
        cols = {name: [] for name in header}
        for row in reader:
            cols["iter"].append(int(row[0]))
            for name, val in zip(header[1:], row[1:]):
                cols[name].append(float(val))
    return cols


def save_hamiltonian(path, h: NearestNeighbourHamiltonian):
    doc = {
        "format": _HAMILTONIAN_FORMAT,
        "version": 1,
        "n": h.n_sites,
        "seed": h.seed,
        "terms": [{"re": t.real.tolist(), "im": t.imag.tolist()} for t in h.terms],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def load_hamiltonian(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParameterError(f"{path}: bad Hamiltonian file: {exc}") from None
    _require(doc.get("format") == _HAMILTONIAN_FORMAT, f"{path}: not a Hamiltonian file")
    terms = tuple(np.asarray(t["re"]) + 1j * np.asarray(t["im"]) for t in doc["terms"])
    return NearestNeighbourHamiltonian(doc["n"], terms, doc.get("seed"))


@dataclass(frozen=True)
class ExperimentManifest:
    """Everything needed to regenerate one experiment deterministically."""

    kind: str                    # "thermal" | "ground" | "ghz"
    n: int
    seed: int = 0
    beta: float | None = None
    phase: float | None = None
    block_len: int | None = None
    shots: float | None = None   # None = exact distributions
    povm: str = "local"
    max_bond: int | None = None
    iterations: int | None = None
    dilution: float = 0.0
    pure: bool = False
    paths: dict | None = None    # artifact name -> file path


def save_manifest(path, manifest: ExperimentManifest):
    doc = {"format": _MANIFEST_FORMAT, "version": 1}
    doc.update(asdict(manifest))
    if doc["shots"] is not None and np.isinf(doc["shots"]):
        doc["shots"] = None
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def load_manifest(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParameterError(f"{path}: bad manifest: {exc}") from None
    _require(doc.get("format") == _MANIFEST_FORMAT, f"{path}: not a manifest")
    doc.pop("format")
    doc.pop("version")
    return ExperimentManifest(**doc)
