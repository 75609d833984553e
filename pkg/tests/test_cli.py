import json

import numpy as np

from mpstomo.cli import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, main
from mpstomo.fileio import ExperimentManifest, load_counts, load_tensors, save_manifest
from mpstomo.metrics import fidelity_pure_mixed, hs_distance
from mpstomo.network import MatrixProductOperator, MatrixProductState, mps_to_mpo
from mpstomo.oracle import densify
from mpstomo.states import ghz_mps


def test_usage_errors_exit_64(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["generate", "--n", "4", "--out", str(tmp_path / "s")]) == EXIT_USAGE
    assert main(["generate", "--kind", "thermal", "--n", "3",
                 "--out", str(tmp_path / "s")]) == EXIT_USAGE  # --beta missing
    assert main(["measure", "--in", str(tmp_path / "missing"), "--r", "2",
                 "--out", str(tmp_path / "c")]) == EXIT_USAGE
    assert main(["measure", "--in", str(tmp_path / "missing"), "--r", "2",
                 "--m", "lots", "--out", str(tmp_path / "c")]) == EXIT_USAGE
    capsys.readouterr()


def test_ghz_pipeline_end_to_end(tmp_path, capsys):
    state = tmp_path / "truth.mps"
    counts = tmp_path / "counts.json"
    estimate = tmp_path / "estimate.mpo"

    assert main(["generate", "--kind", "ghz", "--n", "4", "--phi", "0.0",
                 "--out", str(state)]) == EXIT_OK
    assert main(["measure", "--in", str(state), "--r", "2", "--m", "500",
                 "--povm", "local+ghz", "--seed", "1",
                 "--out", str(counts)]) == EXIT_OK
    code = main(["reconstruct", "--in", str(counts), "--dmax", "6",
                 "--iters", "400", "--seed", "1", "--out", str(estimate)])
    assert code in (EXIT_OK, EXIT_BUDGET)
    capsys.readouterr()

    assert main(["evaluate", "--truth", str(state), "--in", str(estimate)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)

    truth, _ = load_tensors(state)
    est, meta = load_tensors(estimate)
    assert isinstance(est, MatrixProductOperator)
    assert meta["status"] in ("converged", "budget_exhausted")
    assert report["fidelity"] == fidelity_pure_mixed(truth, est)
    assert report["hs_distance"] == hs_distance(mps_to_mpo(truth), est)
    assert report["fidelity"] > 0.8
    # the trace sits next to the estimate by default
    assert (tmp_path / "estimate.mpo.trace.csv").exists()
    # and both artifacts carry provenance sidecars
    assert (tmp_path / "truth.mps.manifest.json").exists()


def test_thermal_beta_zero_is_completely_mixed(tmp_path, capsys):
    out = tmp_path / "t.mpo"
    assert main(["generate", "--kind", "thermal", "--n", "3", "--beta", "0",
                 "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    state, _ = load_tensors(out)
    assert np.allclose(densify(state), np.eye(8) / 8, atol=1e-12)


def test_ground_generation_is_byte_deterministic(tmp_path, capsys):
    args = ["generate", "--kind", "ground", "--n", "5", "--dmax", "8", "--seed", "7"]
    a, b = tmp_path / "a.mps", tmp_path / "b.mps"
    ha, hb = tmp_path / "a.ham", tmp_path / "b.ham"
    assert main(args + ["--out", str(a), "--hamiltonian-out", str(ha)]) == EXIT_OK
    assert main(args + ["--out", str(b), "--hamiltonian-out", str(hb)]) == EXIT_OK
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert ha.read_bytes() == hb.read_bytes()


def test_reconstruct_budget_exhaustion_exits_2(tmp_path, capsys):
    state = tmp_path / "truth.mps"
    counts = tmp_path / "counts.json"
    main(["generate", "--kind", "ghz", "--n", "4", "--out", str(state)])
    main(["measure", "--in", str(state), "--r", "2", "--m", "100",
          "--out", str(counts)])
    code = main(["reconstruct", "--in", str(counts), "--dmax", "4", "--iters", "3",
                 "--out", str(tmp_path / "e.mpo")])
    capsys.readouterr()
    assert code == EXIT_BUDGET
    _, meta = load_tensors(tmp_path / "e.mpo")
    assert meta["status"] == "budget_exhausted"
    assert meta["iterations"] == 3


def test_reconstruct_estimate_is_byte_deterministic(tmp_path, capsys):
    state = tmp_path / "truth.mps"
    counts = tmp_path / "counts.json"
    main(["generate", "--kind", "ghz", "--n", "4", "--out", str(state)])
    main(["measure", "--in", str(state), "--r", "2", "--m", "50",
          "--out", str(counts)])
    rec = ["reconstruct", "--in", str(counts), "--dmax", "4", "--iters", "40",
           "--seed", "2"]
    a, b = tmp_path / "a.mpo", tmp_path / "b.mpo"
    main(rec + ["--out", str(a)])
    main(rec + ["--out", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_reconstruct_pure_flag_writes_mps(tmp_path, capsys):
    state = tmp_path / "truth.mps"
    counts = tmp_path / "counts.json"
    main(["generate", "--kind", "ghz", "--n", "4", "--out", str(state)])
    main(["measure", "--in", str(state), "--r", "2", "--m", "inf",
          "--povm", "local+ghz", "--out", str(counts)])
    record, _, _ = load_counts(counts)
    assert record.exact
    code = main(["reconstruct", "--in", str(counts), "--dmax", "4",
                 "--iters", "500", "--pure", "--out", str(tmp_path / "e.mps")])
    capsys.readouterr()
    assert code in (EXIT_OK, EXIT_BUDGET)
    est, _ = load_tensors(tmp_path / "e.mps")
    assert isinstance(est, MatrixProductState)


def test_manifest_driven_pipeline_with_flag_override(tmp_path, capsys):
    man_path = tmp_path / "run.json"
    state = tmp_path / "truth.mps"
    counts = tmp_path / "counts.json"
    manifest = ExperimentManifest(
        kind="ghz", n=4, seed=3, phase=float(np.pi / 2), block_len=2,
        shots=200, povm="local+ghz",
        paths={"state": str(state), "counts": str(counts)})
    save_manifest(man_path, manifest)

    assert main(["generate", "--manifest", str(man_path)]) == EXIT_OK
    truth, _ = load_tensors(state)
    assert np.allclose(densify(truth), densify(ghz_mps(4, np.pi / 2)), atol=1e-14)

    # flag overrides the manifest's shot count
    assert main(["measure", "--manifest", str(man_path), "--m", "25"]) == EXIT_OK
    capsys.readouterr()
    record, povm, _ = load_counts(counts)
    assert povm.ghz is not None
    assert all(e.counts.sum() == 25 for e in record.entries)


def test_evaluate_identical_pure_files(tmp_path, capsys):
    state = tmp_path / "truth.mps"
    main(["generate", "--kind", "ghz", "--n", "4", "--out", str(state)])
    capsys.readouterr()
    out = tmp_path / "report.json"
    assert main(["evaluate", "--truth", str(state), "--in", str(state),
                 "--out", str(out)]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    saved = json.loads(out.read_text())
    assert printed == saved
    assert printed["hs_distance"] < 1e-12
    assert abs(printed["fidelity"] - 1.0) < 1e-12
