"""JSON instance files: parsing, serialization, digests."""

import json
import re

import numpy as np
import pytest
from numpy.testing import assert_allclose

from margcheck import classical as cl
from margcheck import iofiles as io
from margcheck import qcompat as qc
from margcheck._rat import rat
from margcheck.errors import InputError

from conftest import family_of, fixture_path, load_fixture, random_joint

R = rat


def test_load_fixture_documents():
    doc = io.load_document(fixture_path("classical_uniform_pairs.json"))
    assert doc["kind"] == "classical_family"
    doc = io.load_document(fixture_path("quantum3_ghz.json"))
    assert doc["kind"] == "quantum_family3"


def test_load_document_errors(tmp_path):
    with pytest.raises(InputError):
        io.load_document(tmp_path / "missing.json")
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(InputError):
        io.load_document(p)
    p.write_text('["a", "list"]')
    with pytest.raises(InputError):
        io.load_document(p)
    p.write_text('{"kind": "mystery"}')
    with pytest.raises(InputError):
        io.load_document(p)


def test_digest_format_and_canonicalization():
    a = {"kind": "spectra", "criterion": "polygon", "spectra": [[0.5, 0.5, 0.5]]}
    b = {"spectra": [[0.5, 0.5, 0.5]], "kind": "spectra", "criterion": "polygon"}
    da, db = io.canonical_digest(a), io.canonical_digest(b)
    assert da == db
    assert re.fullmatch(r"sha256:[0-9a-f]{64}", da)
    c = dict(a, spectra=[[0.5, 0.5, 0.25]])
    assert io.canonical_digest(c) != da


def test_write_json_round_trip(tmp_path):
    p = tmp_path / "out.json"
    io.write_json(p, {"kind": "spectra", "criterion": "polygon", "spectra": []})
    text = p.read_text()
    assert text.endswith("\n")
    assert json.loads(text)["criterion"] == "polygon"


# ---------------------------------------------------------------------------
# classical payloads


def test_classical_family_round_trip(rng):
    F = family_of(random_joint(3, rng))
    back = io.parse_classical_family(io.family_to_payload(F))
    assert back.n == F.n
    assert back.stored_masks() == F.stored_masks()
    for m in F.stored_masks():
        assert back.tables[m].values == F.tables[m].values


def test_classical_joint_round_trip(rng):
    P = random_joint(4, rng)
    back = io.parse_classical_joint(io.joint_to_payload(P))
    assert back.values == P.values


def test_classical_fixture_values():
    F = io.parse_classical_family(load_fixture("classical_ghz_pairs.json"))
    assert F.tables[0b011].values[(0, 0)] == R(1, 2)
    assert F.tables[0b011].values[(0, 1)] == R(0)


def test_classical_rejects_bad_rationals():
    doc = load_fixture("classical_bad_rational.json")
    with pytest.raises(InputError):
        io.parse_classical_family(doc)
    good = load_fixture("classical_uniform_pairs.json")
    bad = json.loads(json.dumps(good))
    bad["marginals"][0]["table"]["00"] = 0.25  # numbers are not accepted
    with pytest.raises(InputError):
        io.parse_classical_family(bad)
    bad = json.loads(json.dumps(good))
    bad["marginals"][0]["table"]["00"] = "-1/4"
    with pytest.raises(InputError):
        io.parse_classical_family(bad)


def test_classical_rejects_structural_errors():
    good = load_fixture("classical_uniform_pairs.json")
    bad = json.loads(json.dumps(good))
    bad["marginals"][0]["subset"] = [2, 1]  # not ascending
    with pytest.raises(InputError):
        io.parse_classical_family(bad)
    bad = json.loads(json.dumps(good))
    bad["marginals"][0]["table"] = {"0": "1/2", "1": "1/2"}  # wrong key width
    with pytest.raises(InputError):
        io.parse_classical_family(bad)
    bad = json.loads(json.dumps(good))
    del bad["n"]
    with pytest.raises(InputError):
        io.parse_classical_family(bad)


# ---------------------------------------------------------------------------
# quantum payloads


def test_quantum3_round_trip():
    F = qc.ReducedFamily3.from_state(qc.sample_density(3, 4, 55))
    back = io.parse_quantum3(io.family3_to_payload(F))
    assert_allclose(back.rho12, F.rho12, atol=1e-15)
    assert_allclose(back.rho13, F.rho13, atol=1e-15)
    assert_allclose(back.rho23, F.rho23, atol=1e-15)


def test_quantum3_requires_exact_subsets():
    F = qc.ReducedFamily3.from_state(qc.sample_density(3, 4, 56))
    doc = io.family3_to_payload(F)
    doc["matrices"][0]["subset"] = [1, 1]
    with pytest.raises(InputError):
        io.parse_quantum3(doc)
    doc = io.family3_to_payload(F)
    doc["matrices"][1]["subset"] = [1, 2]  # duplicate of the first
    with pytest.raises(InputError):
        io.parse_quantum3(doc)
    doc = io.family3_to_payload(F)
    del doc["matrices"][2]
    with pytest.raises(InputError):
        io.parse_quantum3(doc)


def test_quantum3_psd_enforcement_is_optional():
    XX = np.kron(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]]))
    M = np.eye(4) / 4 + 0.6 * XX  # indefinite, unit trace, equimarginal
    doc = {"kind": "quantum_family3", "matrices": [
        {"subset": s, "data": io.matrix_to_pairs(M.astype(complex))}
        for s in ([1, 2], [1, 3], [2, 3])]}
    with pytest.raises(InputError):
        io.parse_quantum3(doc)
    F = io.parse_quantum3(doc, require_psd=False)
    assert not qc.check_bell_wigner(F).passes


def test_matrix_entries_must_be_pairs():
    doc = load_fixture("quantum3_maximally_mixed.json")
    bad = json.loads(json.dumps(doc))
    bad["matrices"][0]["data"][0][0] = 0.25  # bare number
    with pytest.raises(InputError):
        io.parse_quantum3(bad)
    bad = json.loads(json.dumps(doc))
    bad["matrices"][0]["data"][0][0] = [0.25, 0.0, 0.0]
    with pytest.raises(InputError):
        io.parse_quantum3(bad)


def test_density_round_trip():
    rho = qc.sample_density(3, 4, 57)
    back = io.parse_density(io.density_to_payload(rho))
    assert_allclose(back, rho, atol=1e-15)


def test_quantum_family_n_round_trip():
    rho = qc.sample_density(3, 2, 58)
    from conftest import all_reductions
    fam = all_reductions(rho, 3)
    doc = {"kind": "quantum_family_n", "n": 3, "matrices": [
        {"subset": list(cl.indices_from_mask(m)), "data": io.matrix_to_pairs(v)}
        for m, v in fam.items()]}
    n, parsed = io.parse_quantum_family_n(doc)
    assert n == 3
    assert set(parsed) == set(fam)
    for m in fam:
        assert_allclose(parsed[m], fam[m], atol=1e-15)


# ---------------------------------------------------------------------------
# spectra payloads


def test_spectra_parsing():
    crit, rows = io.parse_spectra(load_fixture("spectra_higuchi_slack.json"))
    assert crit == "higuchi"
    assert len(rows) == 3 and all(len(r) == 3 for r in rows)
    crit, rows = io.parse_spectra({"kind": "spectra", "spectra": [[0.5, 0.5]]})
    assert crit is None


def test_spectra_rejects_bad_entries():
    with pytest.raises(InputError):
        io.parse_spectra({"kind": "spectra", "criterion": "polygon",
                          "spectra": [["x", 0.5]]})
    with pytest.raises(InputError):
        io.parse_spectra({"kind": "spectra", "criterion": "unknown",
                          "spectra": [[0.5]]})
