"""Command-line front end.

Subcommands map onto the library checkers one-to-one; every run prints a
single JSON report to stdout and encodes its outcome in the process exit
code:

    0  compatible / condition passed / reconstructed
    1  incompatible
    2  undetermined (probe only)
    3  input error (malformed files, violated preconditions, caps)
    4  internal cross-check mismatch or numeric failure

Reports are deterministic for fixed inputs and flags except for the
trailing timing field.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, classical, lp, qcompat, spectra
from ._rat import rat_to_str
from .classical import indices_from_mask
from .errors import (IncompatibleFamilyError, InputError, MargcheckError,
                     NumericError, ResourceError)
from .iofiles import (
    canonical_digest,
    density_to_payload,
    family3_to_payload,
    joint_to_payload,
    load_document,
    parse_classical_family,
    parse_quantum3,
    parse_spectra,
    write_json,
)

EXIT_COMPATIBLE = 0
EXIT_INCOMPATIBLE = 1
EXIT_UNDETERMINED = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage, which collides with the
    'undetermined' code; surface usage problems as input errors instead."""

    def error(self, message):
        raise InputError(message)


def _envelope(command, args, digest):
    return {
        "tool": "margcheck",
        "version": __version__,
        "command": command,
        "args": args,
        "input_digest": digest,
    }


def _emit(report, t0):
    report["timing_s"] = round(time.perf_counter() - t0, 6)
    print(json.dumps(report, indent=2))
    return report["exit_code"]


def _vector_pairs(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).ravel()]


def _matrix_pairs(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _witness_payload(w: classical.Witness):
    return {
        "kind": w.kind,
        "subset": list(indices_from_mask(w.subset)),
        "outcome": "".join(str(b) for b in w.outcome),
        "value": rat_to_str(w.value),
    }


def _equimarginal_payload(w: classical.EquimarginalWitness):
    return {
        "subset_a": list(indices_from_mask(w.subset_a)),
        "subset_b": list(indices_from_mask(w.subset_b)),
        "common": list(indices_from_mask(w.common)),
        "restriction": "".join(str(b) for b in w.restriction),
        "value_a": rat_to_str(w.value_a),
        "value_b": rat_to_str(w.value_b),
    }


def _default_out(path, suffix):
    return str(path) + suffix


def _threads():
    raw = os.environ.get("MC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# subcommands

_CLASSICAL_METHODS = ("theorem2", "theorem3", "wigner", "oracle")


def cmd_check_classical(ns):
    t0 = time.perf_counter()
    doc = load_document(ns.path)
    F = parse_classical_family(doc)
    report = _envelope("check-classical",
                       {"path": ns.path, "method": ns.method},
                       canonical_digest(doc))
    report["n"] = F.n
    report["subsets"] = [list(indices_from_mask(m)) for m in F.stored_masks()]

    ok, ew = classical.check_equimarginal(F)
    report["equimarginal"] = ok
    if not ok:
        # overlapping stored tables disagree, so no joint can exist; the
        # theorem checks presuppose agreement and are not run
        report["equimarginal_witness"] = _equimarginal_payload(ew)
        report["verdict"] = "incompatible"
        report["exit_code"] = EXIT_INCOMPATIBLE
        return _emit(report, t0)

    wanted = list(_CLASSICAL_METHODS) if ns.method == "all" else [ns.method]
    if ns.method == "all":
        try:
            classical._require_pairwise3(F)
        except InputError:
            wanted.remove("wigner")

    results = {}
    verdicts = {}
    for name in wanted:
        if name == "theorem2":
            v = classical.check_theorem2(F)
        elif name == "theorem3":
            v = classical.check_theorem3(F)
        elif name == "wigner":
            v = classical.check_wigner(F)
        else:
            o = lp.oracle_verdict(F)
            entry = {"compatible": o.feasible}
            if o.feasible:
                entry["solution"] = {
                    "".join(str(b) for b in x): rat_to_str(val)
                    for x, val in zip(classical.all_outcomes(F.n), o.solution)
                }
            results["oracle"] = entry
            verdicts["oracle"] = o.feasible
            continue
        entry = {"compatible": v.compatible}
        if v.witness is not None:
            entry["witness"] = _witness_payload(v.witness)
        results[name] = entry
        verdicts[name] = v.compatible
    report["methods"] = results

    if len(set(verdicts.values())) > 1:
        report["divergence"] = verdicts
        report["verdict"] = "error"
        report["exit_code"] = EXIT_INTERNAL
        return _emit(report, t0)

    compatible = next(iter(verdicts.values()))
    report["verdict"] = "compatible" if compatible else "incompatible"
    report["exit_code"] = EXIT_COMPATIBLE if compatible else EXIT_INCOMPATIBLE
    return _emit(report, t0)


def cmd_reconstruct(ns):
    t0 = time.perf_counter()
    doc = load_document(ns.path)
    F = parse_classical_family(doc)
    out = ns.out or _default_out(ns.path, ".joint.json")
    report = _envelope("reconstruct", {"path": ns.path, "out": out},
                       canonical_digest(doc))

    ok, ew = classical.check_equimarginal(F)
    if not ok:
        report["equimarginal_witness"] = _equimarginal_payload(ew)
        report["verdict"] = "incompatible"
        report["exit_code"] = EXIT_INCOMPATIBLE
        return _emit(report, t0)

    try:
        lo, hi = classical.joint_coefficient_interval(F)
        P = classical.reconstruct_joint(F)
    except IncompatibleFamilyError as e:
        if e.witness is not None:
            report["witness"] = _witness_payload(e.witness)
        report["verdict"] = "incompatible"
        report["exit_code"] = EXIT_INCOMPATIBLE
        return _emit(report, t0)

    for mask in F.stored_masks():
        got = classical.marginalize(P, mask)
        if got.values != F.tables[mask].values:
            report["verdict"] = "error"
            report["error"] = (f"reconstructed joint fails to reproduce the "
                               f"marginal of {list(indices_from_mask(mask))}")
            report["exit_code"] = EXIT_INTERNAL
            return _emit(report, t0)

    write_json(out, joint_to_payload(P))
    report["top_coefficient_interval"] = [rat_to_str(lo), rat_to_str(hi)]
    report["round_trip"] = "exact"
    report["output_file"] = out
    report["verdict"] = "compatible"
    report["exit_code"] = EXIT_COMPATIBLE
    return _emit(report, t0)


def cmd_check_quantum3(ns):
    t0 = time.perf_counter()
    doc = load_document(ns.path)
    F = parse_quantum3(doc)
    report = _envelope("check-quantum3", {"path": ns.path},
                       canonical_digest(doc))

    ok, dev = qcompat.check_q_equimarginal(F)
    report["equimarginal_deviation"] = dev
    if not ok:
        report["error"] = (f"pair states disagree on a common qubit "
                           f"(deviation {dev:.3e})")
        report["verdict"] = "error"
        report["exit_code"] = EXIT_INPUT
        return _emit(report, t0)

    v = qcompat.check_bell_wigner(F)
    report["necessary_only"] = True
    report["min_eig"] = v.min_eig
    report["max_eig"] = v.max_eig
    if v.witness is not None:
        D = qcompat.delta_operator(F)
        expect = float(np.real(np.vdot(v.witness, D @ v.witness)))
        report["witness"] = {"vector": _vector_pairs(v.witness),
                             "expectation": expect}
    report["verdict"] = "pass" if v.passes else "fail"
    report["exit_code"] = EXIT_COMPATIBLE if v.passes else EXIT_INCOMPATIBLE
    return _emit(report, t0)


def cmd_probe(ns):
    t0 = time.perf_counter()
    doc = load_document(ns.path)
    F = parse_quantum3(doc)
    out = ns.out or _default_out(ns.path, ".candidate.json")
    args = {"path": ns.path, "max_iter": ns.max_iter, "tol": ns.tol,
            "out": out}
    if ns.seed is not None:
        args["seed"] = ns.seed
    report = _envelope("probe", args, canonical_digest(doc))
    if ns.seed is not None:
        report["seed"] = ns.seed

    try:
        rep = qcompat.probe_sufficiency(F, max_iter=ns.max_iter,
                                        tol_probe=ns.tol)
    except IncompatibleFamilyError as e:
        v = e.witness
        report["error"] = ("family fails the operator test; the "
                           "reconstruction hypothesis does not apply")
        if v is not None:
            report["min_eig"] = v.min_eig
            report["max_eig"] = v.max_eig
        report["verdict"] = "error"
        report["exit_code"] = EXIT_INPUT
        return _emit(report, t0)

    report["iterations"] = rep.iterations
    report["residual"] = rep.residual
    if rep.status == "reconstructed":
        write_json(out, density_to_payload(rep.candidate))
        report["candidate_file"] = out
        report["verdict"] = "reconstructed"
        report["exit_code"] = EXIT_COMPATIBLE
    else:
        report["verdict"] = "undetermined"
        report["exit_code"] = EXIT_UNDETERMINED
    return _emit(report, t0)


def cmd_counterexample_n4(ns):
    t0 = time.perf_counter()
    rep = qcompat.counterexample_n4()
    report = _envelope("counterexample-n4", {}, None)
    report["state"] = _vector_pairs(rep.psi)
    report["delta"] = _matrix_pairs(rep.delta)
    report["min_eig"] = rep.min_eig
    report["max_eig"] = rep.max_eig
    report["witness"] = _vector_pairs(rep.witness)
    report["witness_overlap"] = rep.witness_overlap
    report["closed_form_residual"] = rep.closed_form_residual
    report["verdict"] = "confirmed"
    report["exit_code"] = EXIT_COMPATIBLE
    return _emit(report, t0)


def cmd_check_spectra(ns):
    t0 = time.perf_counter()
    doc = load_document(ns.path)
    file_criterion, vals = parse_spectra(doc)
    criterion = ns.criterion or file_criterion
    if criterion is None:
        raise InputError("no criterion: pass --criterion or set the "
                         "file's criterion field")
    if ns.criterion and file_criterion and ns.criterion != file_criterion:
        raise InputError(f"--criterion {ns.criterion} contradicts the "
                         f"file's criterion {file_criterion}")
    args = {"path": ns.path, "criterion": criterion}
    if ns.fermions is not None:
        args["fermions"] = ns.fermions
    report = _envelope("check-spectra", args, canonical_digest(doc))
    report["criterion"] = criterion

    if criterion == "polygon":
        if len(vals) != 1:
            raise InputError("polygon expects a single list of the "
                             "per-party smaller eigenvalues")
        v = spectra.check_polygon(vals[0])
    elif criterion == "higuchi":
        if len(vals) != 3:
            raise InputError("higuchi expects exactly three spectra")
        v = spectra.check_higuchi(*vals)
    elif criterion == "bravyi":
        if len(vals) != 3 or len(vals[0]) != 1 or len(vals[1]) != 1:
            raise InputError("bravyi expects [[l1], [l2], [4-entry "
                             "spectrum]]")
        v = spectra.check_bravyi(vals[0][0], vals[1][0], vals[2])
    elif criterion == "hzg":
        lengths = {len(s) for s in vals}
        if len(lengths) != 1:
            raise InputError("hzg expects spectra of one common length")
        v = spectra.check_hzg(vals)
        report["necessary_only"] = True
        report["consistent_with_necessity"] = v.consistent_with_necessity
        report["failed_inequality"] = v.failed_inequality
        ok = v.consistent_with_necessity
        report["verdict"] = "consistent" if ok else "incompatible"
        report["exit_code"] = EXIT_COMPATIBLE if ok else EXIT_INCOMPATIBLE
        return _emit(report, t0)
    elif criterion == "coleman":
        if ns.fermions is None:
            raise InputError("coleman requires --fermions")
        if len(vals) != 1:
            raise InputError("coleman expects a single spectrum")
        v = spectra.check_coleman(vals[0], ns.fermions)
    else:
        raise InputError(f"unknown criterion {criterion!r}")

    report["failed_inequality"] = v.failed_inequality
    report["verdict"] = "compatible" if v.compatible else "incompatible"
    report["exit_code"] = (EXIT_COMPATIBLE if v.compatible
                           else EXIT_INCOMPATIBLE)
    return _emit(report, t0)


def cmd_sample(ns):
    t0 = time.perf_counter()
    if ns.count < 1:
        raise InputError("--count must be positive")
    args = {"qubits": ns.qubits, "rank": ns.rank, "seed": ns.seed,
            "count": ns.count, "out": ns.out}
    report = _envelope("sample", args, None)
    report["seed"] = ns.seed

    def one(i):
        seed_i = ns.seed + i
        rho = qcompat.sample_density(ns.qubits, ns.rank, seed_i)
        fam = None
        verdict = None
        if ns.qubits == 3:
            fam = qcompat.ReducedFamily3.from_state(rho)
            verdict = qcompat.check_bell_wigner(fam)
        return seed_i, rho, fam, verdict

    workers = min(_threads(), ns.count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            drawn = list(pool.map(one, range(ns.count)))
    else:
        drawn = [one(i) for i in range(ns.count)]

    os.makedirs(ns.out, exist_ok=True)
    files = []
    families = []
    all_pass = True
    for seed_i, rho, fam, verdict in drawn:
        stem = f"q{ns.qubits}-r{ns.rank}-s{seed_i}"
        dpath = os.path.join(ns.out, f"density-{stem}.json")
        write_json(dpath, density_to_payload(rho))
        files.append(dpath)
        if fam is not None:
            fpath = os.path.join(ns.out, f"family3-{stem}.json")
            write_json(fpath, family3_to_payload(fam))
            families.append({
                "file": fpath,
                "passes": verdict.passes,
                "min_eig": verdict.min_eig,
                "max_eig": verdict.max_eig,
            })
            all_pass = all_pass and verdict.passes
    report["files"] = files
    if ns.qubits == 3:
        report["families"] = families
    if not all_pass:
        # reductions of an honest state can never fail the operator test
        report["error"] = "a sampled state's own reductions failed the test"
        report["verdict"] = "error"
        report["exit_code"] = EXIT_INTERNAL
        return _emit(report, t0)
    report["verdict"] = "ok"
    report["exit_code"] = EXIT_COMPATIBLE
    return _emit(report, t0)


# ---------------------------------------------------------------------------
# wiring

def build_parser() -> _Parser:
    p = _Parser(prog="margcheck",
                description="Decide compatibility of subsystem marginals: "
                            "exact classical checks, quantum operator "
                            "tests, and spectral criteria.")
    sub = p.add_subparsers(dest="cmd", metavar="COMMAND")

    c = sub.add_parser("check-classical", parents=[],
                       help="exact compatibility of a marginal family")
    c.add_argument("path")
    c.add_argument("--method", choices=_CLASSICAL_METHODS + ("all",),
                   default="all")
    c.set_defaults(func=cmd_check_classical)

    c = sub.add_parser("reconstruct",
                       help="build an explicit joint distribution")
    c.add_argument("path")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("check-quantum3",
                       help="three-qubit operator test on pair states")
    c.add_argument("path")
    c.set_defaults(func=cmd_check_quantum3)

    c = sub.add_parser("probe",
                       help="search for a joint state by alternating "
                            "projections")
    c.add_argument("path")
    c.add_argument("--max-iter", type=int, default=5000, dest="max_iter")
    c.add_argument("--tol", type=float, default=1e-7)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_probe)

    c = sub.add_parser("counterexample-n4",
                       help="reproduce the four-party counterexample")
    c.set_defaults(func=cmd_counterexample_n4)

    c = sub.add_parser("check-spectra",
                       help="spectral criteria on eigenvalue lists")
    c.add_argument("path")
    c.add_argument("--criterion", choices=("polygon", "higuchi", "bravyi",
                                           "hzg", "coleman"), default=None)
    c.add_argument("--fermions", type=int, default=None)
    c.set_defaults(func=cmd_check_spectra)

    c = sub.add_parser("sample",
                       help="draw reproducible random states to files")
    c.add_argument("--qubits", type=int, required=True)
    c.add_argument("--rank", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--count", type=int, default=1)
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_sample)

    return p


def _error_report(command, message, code):
    return {
        "tool": "margcheck",
        "version": __version__,
        "command": command,
        "error": message,
        "verdict": "error",
        "exit_code": code,
    }


def main(argv=None) -> int:
    t0 = time.perf_counter()
    parser = build_parser()
    command = None
    try:
        ns = parser.parse_args(argv)
        if not getattr(ns, "func", None):
            raise InputError("no command given (try --help)")
        command = ns.cmd
        return ns.func(ns)
    except (InputError, ResourceError) as e:
        return _emit(_error_report(command, str(e), EXIT_INPUT), t0)
    except IncompatibleFamilyError as e:
        return _emit(_error_report(command, str(e), EXIT_INCOMPATIBLE), t0)
    except NumericError as e:
        return _emit(_error_report(command, str(e), EXIT_INTERNAL), t0)
    except MargcheckError as e:
        return _emit(_error_report(command, str(e), EXIT_INTERNAL), t0)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
