"""Command-line pipeline: generate, measure, reconstruct, evaluate.

Each stage reads and writes the shared file formats, so the stages can
be chained or rerun independently. All randomness flows from --seed and
every artifact gets a provenance sidecar, making full pipelines
reproducible byte for byte (iteration traces excepted — they record
wall-clock times).

Exit codes: 0 success/converged, 2 iteration budget exhausted,
3 compression abort (partial outputs retained), 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import fileio
from .errors import MpstomoError
from .fileio import ExperimentManifest
from .metrics import fidelity_pure_mixed, fidelity_pure_pure, hs_distance
from .mle import ReconstructionConfig, reconstruct
from .network import MatrixProductState, mps_to_mpo
from .povm import GlobalGhzPovm, LocalBlockPovm, PovmSet
from .sim import measure
from .states import ghz_mps, ground_state_search, random_hamiltonian, thermal_state_dense

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_ABORTED = 3
EXIT_USAGE = 64

_STATUS_CODES = {
    "converged": EXIT_OK,
    "budget_exhausted": EXIT_BUDGET,
    "aborted": EXIT_ABORTED,
}


class _Parser(argparse.ArgumentParser):
    # argparse's default usage-error exit code is 2, which collides with
    # the budget-exhausted code.
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_shots(text):
    if text is None:
        return None
    if text.lower() == "inf":
        return None
    try:
        shots = int(text)
    except ValueError:
        raise MpstomoError(f"--m expects an integer or 'inf', got {text!r}") from None
    if shots <= 0:
        raise MpstomoError(f"--m must be positive, got {shots}")
    return shots


def _manifest(args):
    if getattr(args, "manifest", None):
        return fileio.load_manifest(args.manifest)
    return ExperimentManifest(kind="", n=0)


def _pick(flag, manifest_value, default=None):
    if flag is not None:
        return flag
    if manifest_value is not None:
        return manifest_value
    return default


def _path(args, manifest, flag_name, role):
    value = getattr(args, flag_name, None)
    if value is None and manifest.paths:
        value = manifest.paths.get(role)
    return value


def _require(value, what):
    if value is None:
        raise MpstomoError(f"missing {what}")
    return value


def _sidecar(out_path, manifest):
    fileio.save_manifest(str(out_path) + ".manifest.json", manifest)


def _cmd_generate(args):
    man = _manifest(args)
    kind = _require(_pick(args.kind, man.kind or None), "--kind")
    n = int(_require(_pick(args.n, man.n or None), "--n"))
    seed = int(_pick(args.seed, man.seed if args.manifest else None, 0))
    out = _require(_path(args, man, "out", "state"), "--out")
    ham_out = _path(args, man, "hamiltonian_out", "hamiltonian")

    if kind == "ghz":
        phase = float(_pick(args.phi, man.phase, 0.0))
        state = ghz_mps(n, phase=phase)
        used = ExperimentManifest(kind=kind, n=n, seed=seed, phase=phase,
                                  paths={"state": str(out)})
    elif kind == "thermal":
        beta = float(_require(_pick(args.beta, man.beta), "--beta"))
        max_bond = _pick(args.dmax, man.max_bond)
        h = random_hamiltonian(n, seed=seed)
        state, _ = thermal_state_dense(h, beta, max_fit_bond=max_bond)
        if ham_out:
            fileio.save_hamiltonian(ham_out, h)
        used = ExperimentManifest(kind=kind, n=n, seed=seed, beta=beta,
                                  max_bond=max_bond, paths={"state": str(out)})
    elif kind == "ground":
        max_bond = int(_pick(args.dmax, man.max_bond, 32))
        h = random_hamiltonian(n, seed=seed)
        result = ground_state_search(h, max_bond, seed=seed)
        state = result.state
        if ham_out:
            fileio.save_hamiltonian(ham_out, h)
        used = ExperimentManifest(kind=kind, n=n, seed=seed,
                                  max_bond=max_bond, paths={"state": str(out)})
    else:
        raise MpstomoError(f"unknown kind {kind!r}")

    fileio.save_tensors(out, state, meta={"kind": kind, "seed": seed})
    _sidecar(out, used)
    print(f"wrote {out} ({kind}, n={n}, seed={seed})")
    return EXIT_OK


def _build_povm(name, n, block_len):
    local = LocalBlockPovm(n, block_len)
    ghz = GlobalGhzPovm(n) if name == "local+ghz" else None
    if name not in ("local", "local+ghz"):
        raise MpstomoError(f"--povm expects 'local' or 'local+ghz', got {name!r}")
    return PovmSet(local, ghz)


def _cmd_measure(args):
    man = _manifest(args)
    in_path = _require(_path(args, man, "in_path", "state"), "--in")
    out = _require(_path(args, man, "out", "counts"), "--out")
    block_len = int(_require(_pick(args.r, man.block_len), "--r"))
    povm_name = _pick(args.povm, man.povm if args.manifest else None, "local")
    seed = int(_pick(args.seed, man.seed if args.manifest else None, 0))
    shots = _parse_shots(args.m) if args.m is not None else man.shots
    shots = int(shots) if shots else None

    state, _ = fileio.load_tensors(in_path)
    povm = _build_povm(povm_name, state.n_sites, block_len)
    record = measure(state, povm, shots, seed=seed)
    meta = {"seed": seed, "source": str(in_path)}
    fileio.save_counts(out, record, povm, meta=meta)
    label = "exact" if shots is None else f"m={shots}"
    print(f"wrote {out} ({len(record.entries)} settings, {label}, seed={seed})")
    return EXIT_OK


def _cmd_reconstruct(args):
    man = _manifest(args)
    in_path = _require(_path(args, man, "in_path", "counts"), "--in")
    out = _require(_path(args, man, "out", "estimate"), "--out")
    trace_path = _path(args, man, "trace", "trace") or str(out) + ".trace.csv"
    max_bond = int(_require(_pick(args.dmax, man.max_bond), "--dmax"))
    iters = int(_pick(args.iters, man.iterations, 1000))
    dilution = float(_pick(args.epsilon, man.dilution or None, 0.0))
    pure = bool(args.pure or man.pure)
    seed = int(_pick(args.seed, man.seed if args.manifest else None, 0))

    record, povm, _ = fileio.load_counts(in_path)
    cfg = ReconstructionConfig(max_bond=max_bond, max_iterations=iters,
                               pure=pure, dilution=dilution, seed=seed)
    result = reconstruct(record, povm.n_sites, cfg)

    meta = {"status": result.status, "iterations": result.iterations,
            "final_log_likelihood": result.final_log_likelihood,
            "seed": seed, "source": str(in_path)}
    fileio.save_tensors(out, result.state, meta=meta)
    fileio.save_trace_csv(trace_path, result.trace)
    print(f"{result.status} after {result.iterations} iterations, "
          f"logLik={result.final_log_likelihood:.6f}")
    print(f"wrote {out} and {trace_path}")
    return _STATUS_CODES[result.status]


def _cmd_evaluate(args):
    truth_path = _require(args.truth, "--truth")
    est_path = _require(args.in_path, "--in")
    truth, _ = fileio.load_tensors(truth_path)
    estimate, _ = fileio.load_tensors(est_path)

    truth_pure = isinstance(truth, MatrixProductState)
    est_pure = isinstance(estimate, MatrixProductState)
    truth_mpo = mps_to_mpo(truth) if truth_pure else truth
    est_mpo = mps_to_mpo(estimate) if est_pure else estimate
    report = {
        "n": truth.n_sites,
        "truth": str(truth_path),
        "estimate": str(est_path),
        "hs_distance": hs_distance(truth_mpo, est_mpo),
    }
    if truth_pure and est_pure:
        report["fidelity"] = fidelity_pure_pure(truth, estimate)
    elif truth_pure:
        report["fidelity"] = fidelity_pure_mixed(truth, estimate)

    text = json.dumps(report, sort_keys=True, indent=1)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _add_common(sub):
    sub.add_argument("--manifest", help="experiment manifest JSON; flags override")
    sub.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = _Parser(prog="mpstomo",
                     description="Tensor-network state tomography pipeline.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="generate a truth state file")
    gen.add_argument("--kind", choices=("thermal", "ground", "ghz"))
    gen.add_argument("--n", type=int)
    gen.add_argument("--beta", type=float, help="inverse temperature (thermal)")
    gen.add_argument("--phi", type=float, help="GHZ relative phase")
    gen.add_argument("--dmax", type=int, help="generation bond limit")
    gen.add_argument("--out")
    gen.add_argument("--hamiltonian-out", dest="hamiltonian_out")
    _add_common(gen)
    gen.set_defaults(handler=_cmd_generate)

    mea = commands.add_parser("measure", help="simulate measurement counts")
    mea.add_argument("--in", dest="in_path", help="state file")
    mea.add_argument("--r", type=int, help="local block length")
    mea.add_argument("--m", help="shots per setting, or 'inf' for exact")
    mea.add_argument("--povm", choices=("local", "local+ghz"))
    mea.add_argument("--out")
    _add_common(mea)
    mea.set_defaults(handler=_cmd_measure)

    rec = commands.add_parser("reconstruct", help="run the fixed-point solver")
    rec.add_argument("--in", dest="in_path", help="counts file")
    rec.add_argument("--dmax", type=int, help="reconstruction bond limit")
    rec.add_argument("--iters", type=int, help="iteration budget")
    rec.add_argument("--epsilon", type=float, help="dilution parameter")
    rec.add_argument("--pure", action="store_true", help="pure-state estimate")
    rec.add_argument("--out")
    rec.add_argument("--trace", help="iteration trace CSV path")
    _add_common(rec)
    rec.set_defaults(handler=_cmd_reconstruct)

    eva = commands.add_parser("evaluate", help="score an estimate against truth")
    eva.add_argument("--truth", help="truth state file")
    eva.add_argument("--in", dest="in_path", help="estimate state file")
    eva.add_argument("--out", help="optional JSON report path")
    eva.set_defaults(handler=_cmd_evaluate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on usage errors; keep main() returning an int
        return exc.code if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except MpstomoError as exc:
        print(f"mpstomo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"mpstomo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
