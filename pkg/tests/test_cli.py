"""End-to-end command tests: exit codes, report shape, file outputs."""

import json
import os
import re
import shutil
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from margcheck import cli
from margcheck import iofiles as io
from margcheck import qcompat as qc
from margcheck import qlinalg as ql

from conftest import fixture_path

ENVELOPE_HEAD = ["tool", "version", "command", "args", "input_digest"]


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    rep = json.loads(out)
    assert rep["exit_code"] == code
    return code, rep


def fx(name, tmp_path):
    # work on a copy so default-path outputs land in tmp_path
    dst = tmp_path / name
    shutil.copy(fixture_path(name), dst)
    return str(dst)


# ---------------------------------------------------------------------------
# report envelope


def test_report_envelope_shape(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_uniform_pairs.json", tmp_path))
    assert code == 0
    keys = list(rep)
    assert keys[:5] == ENVELOPE_HEAD
    assert keys[-1] == "timing_s"
    assert rep["tool"] == "margcheck"
    assert re.fullmatch(r"sha256:[0-9a-f]{64}", rep["input_digest"])
    assert rep["verdict"] == "compatible"


def test_error_reports_are_json_too(capsys):
    code, rep = run_cli(capsys, "definitely-not-a-command")
    assert code == 3
    assert rep["verdict"] == "error"
    code, rep = run_cli(capsys, "check-classical", "/no/such/file.json")
    assert code == 3


# ---------------------------------------------------------------------------
# check-classical


def test_classical_all_methods_agree(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_uniform_pairs.json", tmp_path),
                        "--method", "all")
    assert code == 0
    assert set(rep["methods"]) == {"theorem2", "theorem3", "wigner", "oracle"}
    assert all(m["compatible"] for m in rep["methods"].values())
    assert "solution" in rep["methods"]["oracle"]


def test_classical_witness_values(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_anticorrelated.json", tmp_path),
                        "--method", "theorem2")
    assert code == 1
    w = rep["methods"]["theorem2"]["witness"]
    assert w["subset"] == [1, 2, 3]
    assert w["outcome"] == "000"
    assert w["value"] == "-1/2"
    assert rep["verdict"] == "incompatible"


def test_classical_malformed_rational(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_bad_rational.json", tmp_path))
    assert code == 3


def test_classical_single_method_selection(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_ghz_pairs.json", tmp_path),
                        "--method", "oracle")
    assert code == 0
    assert list(rep["methods"]) == ["oracle"]
    sol = rep["methods"]["oracle"]["solution"]
    assert sol["000"] == "1/2" and sol["111"] == "1/2"


# ---------------------------------------------------------------------------
# reconstruct


def test_reconstruct_ghz(capsys, tmp_path):
    out = str(tmp_path / "joint.json")
    code, rep = run_cli(capsys, "reconstruct",
                        fx("classical_ghz_pairs.json", tmp_path), "--out", out)
    assert code == 0
    assert rep["top_coefficient_interval"] == ["0", "0"]
    assert rep["round_trip"] == "exact"
    joint = json.load(open(out))
    assert joint["table"]["000"] == "1/2"
    assert joint["table"]["111"] == "1/2"
    assert joint["table"]["010"] == "0"


def test_reconstruct_default_output_path(capsys, tmp_path):
    src = fx("classical_uniform_pairs.json", tmp_path)
    code, rep = run_cli(capsys, "reconstruct", src)
    assert code == 0
    assert os.path.exists(src + ".joint.json")
    assert rep["output_file"].endswith(".joint.json")


def test_reconstruct_refuses_incompatible(capsys, tmp_path):
    src = fx("classical_anticorrelated.json", tmp_path)
    code, rep = run_cli(capsys, "reconstruct", src)
    assert code == 1
    assert not os.path.exists(src + ".joint.json")
    assert rep["witness"]["value"] == "-1/2"


# ---------------------------------------------------------------------------
# check-quantum3


def test_quantum3_maximally_mixed(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-quantum3",
                        fx("quantum3_maximally_mixed.json", tmp_path))
    assert code == 0
    assert abs(rep["min_eig"] - 0.25) < 1e-12
    assert abs(rep["max_eig"] - 0.25) < 1e-12
    assert rep["necessary_only"] is True


def test_quantum3_ghz_reductions(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-quantum3",
                        fx("quantum3_ghz.json", tmp_path))
    assert code == 0
    assert rep["verdict"] == "pass"


def test_quantum3_non_equimarginal(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-quantum3",
                        fx("quantum3_unequal.json", tmp_path))
    assert code == 3
    assert rep["equimarginal_deviation"] > 0.2


def test_quantum3_failing_family_reports_witness(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-quantum3",
                        fx("quantum3_singlets.json", tmp_path))
    assert code == 1
    assert abs(rep["min_eig"] + 0.5) < 1e-9
    assert rep["witness"]["expectation"] < -1e-9
    vec = np.array([complex(a, b) for a, b in rep["witness"]["vector"]])
    F = io.parse_quantum3(json.load(open(fixture_path("quantum3_singlets.json"))),
                          require_psd=False)
    D = qc.delta_operator(F)
    assert abs(np.vdot(vec, D @ vec).real - rep["witness"]["expectation"]) < 1e-9


# ---------------------------------------------------------------------------
# probe


def test_probe_writes_verified_candidate(capsys, tmp_path):
    src = fx("quantum3_sampled_r4.json", tmp_path)
    code, rep = run_cli(capsys, "probe", src)
    assert code == 0
    assert rep["verdict"] == "reconstructed"
    cand_file = src + ".candidate.json"
    assert rep["candidate_file"] == cand_file
    C = io.parse_density(json.load(open(cand_file)))
    F = io.parse_quantum3(json.load(open(src)))
    for mask, pair in ((0b011, F.rho12), (0b101, F.rho13), (0b110, F.rho23)):
        keep = [i + 1 for i in range(3) if mask >> i & 1]
        assert np.abs(ql.partial_trace(C, keep, 3) - pair).max() < 1e-7


def test_probe_maximally_mixed(capsys, tmp_path):
    code, rep = run_cli(capsys, "probe",
                        fx("quantum3_maximally_mixed.json", tmp_path))
    assert code == 0
    assert rep["iterations"] <= 2


def test_probe_refuses_failing_family(capsys, tmp_path):
    src = fx("quantum3_singlets.json", tmp_path)
    code, rep = run_cli(capsys, "probe", src)
    assert code == 3
    assert not os.path.exists(src + ".candidate.json")


def test_probe_undetermined_exit_code(capsys, tmp_path):
    rho = qc.sample_density(3, 1, 909)
    F = qc.ReducedFamily3.from_state(rho)
    src = str(tmp_path / "pure_family.json")
    io.write_json(src, io.family3_to_payload(F))
    code, rep = run_cli(capsys, "probe", src, "--max-iter", "25")
    assert code == 2
    assert rep["verdict"] == "undetermined"
    assert rep["residual"] > 0
    assert not os.path.exists(src + ".candidate.json")


# ---------------------------------------------------------------------------
# counterexample-n4


def test_counterexample_report(capsys):
    code, rep = run_cli(capsys, "counterexample-n4")
    assert code == 0
    assert abs(rep["min_eig"] + 0.5) < 1e-9
    assert rep["witness_overlap"] >= 1 - 1e-9
    assert rep["closed_form_residual"] < 1e-12
    assert rep["input_digest"] is None
    assert rep["verdict"] == "confirmed"


def test_counterexample_deterministic_modulo_timing(capsys):
    _, a = run_cli(capsys, "counterexample-n4")
    _, b = run_cli(capsys, "counterexample-n4")
    a.pop("timing_s"), b.pop("timing_s")
    assert a == b


# ---------------------------------------------------------------------------
# check-spectra


def test_spectra_polygon_pass_fail(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_polygon_ghz.json", tmp_path))
    assert code == 0
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_polygon_pure_partners.json", tmp_path))
    assert code == 1
    assert "polygon" in rep["failed_inequality"]


def test_spectra_criterion_flag_must_match_file(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_polygon_ghz.json", tmp_path),
                        "--criterion", "polygon")
    assert code == 0
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_polygon_ghz.json", tmp_path),
                        "--criterion", "higuchi")
    assert code == 3


def test_spectra_higuchi_and_bravyi(capsys, tmp_path):
    assert run_cli(capsys, "check-spectra",
                   fx("spectra_higuchi_boundary.json", tmp_path))[0] == 0
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_higuchi_mixed_party.json", tmp_path))
    assert code == 1
    assert run_cli(capsys, "check-spectra",
                   fx("spectra_bravyi_double_bell.json", tmp_path))[0] == 0
    assert run_cli(capsys, "check-spectra",
                   fx("spectra_bravyi_unbalanced.json", tmp_path))[0] == 1


def test_spectra_hzg_is_labeled_necessary_only(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_hzg_qutrits.json", tmp_path))
    assert code == 0
    assert rep["necessary_only"] is True
    assert rep["verdict"] == "consistent"
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_hzg_mixed_vs_pure.json", tmp_path))
    assert code == 1


def test_spectra_coleman(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_coleman_fail.json", tmp_path),
                        "--fermions", "2")
    assert code == 1
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_coleman_boundary.json", tmp_path),
                        "--fermions", "3")
    assert code == 0
    code, rep = run_cli(capsys, "check-spectra",
                        fx("spectra_coleman_fail.json", tmp_path))
    assert code == 3  # --fermions is required for this criterion


# ---------------------------------------------------------------------------
# sample


def test_sample_reproducible_and_consistent(capsys, tmp_path):
    out = str(tmp_path / "samples")
    code, rep = run_cli(capsys, "sample", "--qubits", "3", "--rank", "8",
                        "--seed", "1", "--count", "2", "--out", out)
    assert code == 0
    assert len(rep["files"]) == 2
    assert all(f["passes"] for f in rep["families"])
    first = open(rep["files"][0]).read()
    code, rep2 = run_cli(capsys, "sample", "--qubits", "3", "--rank", "8",
                         "--seed", "1", "--count", "2", "--out", out)
    assert open(rep2["files"][0]).read() == first
    fam_file = os.path.join(out, "family3-q3-r8-s1.json")
    code, rep3 = run_cli(capsys, "check-quantum3", fam_file)
    assert code == 0


def test_sample_seed_changes_output(capsys, tmp_path):
    out = str(tmp_path / "s")
    _, rep1 = run_cli(capsys, "sample", "--qubits", "2", "--rank", "2",
                      "--seed", "5", "--out", out)
    _, rep2 = run_cli(capsys, "sample", "--qubits", "2", "--rank", "2",
                      "--seed", "6", "--out", out)
    a = json.load(open(rep1["files"][0]))
    b = json.load(open(rep2["files"][0]))
    assert a != b
    assert rep1["args"]["seed"] == 5


def test_sample_respects_qubit_cap(capsys, tmp_path):
    code, rep = run_cli(capsys, "sample", "--qubits", "7", "--rank", "1",
                        "--seed", "1", "--out", str(tmp_path))
    assert code == 3


def test_sample_thread_fanout_is_deterministic(tmp_path):
    # byte-identical sample files regardless of worker count
    outs = {}
    for threads in ("1", "3"):
        d = tmp_path / f"t{threads}"
        env = dict(os.environ, MC_THREADS=threads)
        r = subprocess.run(
            [sys.executable, "-m", "margcheck", "sample", "--qubits", "3",
             "--rank", "4", "--seed", "12", "--count", "4", "--out", str(d)],
            capture_output=True, text=True, env=env)
        assert r.returncode == 0, r.stdout + r.stderr
        rep = json.loads(r.stdout)
        outs[threads] = [open(f).read() for f in sorted(rep["files"])]
    assert outs["1"] == outs["3"]


def test_console_entry_point_wiring(tmp_path):
    r = subprocess.run([sys.executable, "-m", "margcheck", "counterexample-n4"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["verdict"] == "confirmed"


# ---------------------------------------------------------------------------
# flag errors


def test_missing_required_flag(capsys, tmp_path):
    code, rep = run_cli(capsys, "sample", "--qubits", "3", "--rank", "2")
    assert code == 3  # --seed is required


def test_bad_flag_value(capsys, tmp_path):
    code, rep = run_cli(capsys, "check-classical",
                        fx("classical_uniform_pairs.json", tmp_path),
                        "--method", "numerology")
    assert code == 3
