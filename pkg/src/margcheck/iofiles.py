"""Instance-file parsing, validation, and serialization.

One JSON envelope per file with a `kind` tag: classical families carry
exact rationals as "p/q" strings, quantum matrices carry row-major
[re, im] entry pairs, spectra carry ascending number lists.  Subset
indices are 1-based everywhere.
"""

import hashlib
import json

import numpy as np

from ._rat import rat_from_str, rat_to_str
from .classical import (
    JointTable,
    MarginalFamily,
    MarginalTable,
    all_outcomes,
    indices_from_mask,
    mask_from_indices,
    mask_size,
)
from .errors import InputError
from .qcompat import ReducedFamily3
from .qlinalg import qubit_count, validate_density

KINDS = ("classical_family", "quantum_family3", "quantum_family_n",
         "spectra", "classical_joint", "density")

SPECTRA_CRITERIA = ("polygon", "higuchi", "bravyi", "hzg", "coleman")


def canonical_digest(doc) -> str:
    """Hash of the parsed document re-serialized canonically, so formatting
    and key order don't affect provenance."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InputError(f"{path}: unknown kind {kind!r}; expected one of "
                         + ", ".join(KINDS))
    return doc


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _require(doc, field, typ, what):
    if field not in doc:
        raise InputError(f"{what}: missing field {field!r}")
    v = doc[field]
    if typ is not None and not isinstance(v, typ):
        raise InputError(f"{what}: field {field!r} must be "
                         f"{typ.__name__}, got {type(v).__name__}")
    return v


def _parse_subset(raw, n, what):
    if (not isinstance(raw, list) or not raw
            or not all(isinstance(i, int) and not isinstance(i, bool)
                       for i in raw)):
        raise InputError(f"{what}: subset must be a non-empty list of "
                         f"integers, got {raw!r}")
    if sorted(raw) != raw or len(set(raw)) != len(raw):
        raise InputError(f"{what}: subset {raw} must be strictly ascending")
    if raw[0] < 1 or raw[-1] > n:
        raise InputError(f"{what}: subset {raw} out of range 1..{n}")
    return mask_from_indices(raw, n)


def _parse_bits(key, k, what):
    if not isinstance(key, str) or len(key) != k \
            or any(ch not in "01" for ch in key):
        raise InputError(f"{what}: table key {key!r} is not a "
                         f"{k}-bit string")
    return tuple(int(ch) for ch in key)


def _parse_rational(raw, what):
    if isinstance(raw, str):
        try:
            return rat_from_str(raw)
        except (ValueError, TypeError) as e:
            raise InputError(f"{what}: {e}")
    raise InputError(f"{what}: probabilities must be rational strings "
                     f"like \"1/2\", got {raw!r}")


# ---------------------------------------------------------------------------
# classical

def parse_classical_family(doc) -> MarginalFamily:
    if doc.get("kind") != "classical_family":
        raise InputError(f"expected kind classical_family, got {doc.get('kind')!r}")
    n = _require(doc, "n", int, "classical_family")
    marginals = _require(doc, "marginals", list, "classical_family")
    if not marginals:
        raise InputError("classical_family: empty marginal list")
    tables = []
    for entry in marginals:
        if not isinstance(entry, dict):
            raise InputError("classical_family: each marginal must be an object")
        mask = _parse_subset(entry.get("subset"), n, "classical_family")
        what = f"table for subset {entry['subset']}"
        table = _require(entry, "table", dict, what)
        k = mask_size(mask)
        values = {}
        for key, raw in table.items():
            values[_parse_bits(key, k, what)] = _parse_rational(raw, what)
        tables.append(MarginalTable.make(n, mask, values))
    return MarginalFamily.make(n, tables)


def _bits_key(r) -> str:
    return "".join(str(b) for b in r)


def family_to_payload(F: MarginalFamily) -> dict:
    marginals = []
    for mask in F.stored_masks():
        table = F.tables[mask]
        marginals.append({
            "subset": list(indices_from_mask(mask)),
            "table": {_bits_key(r): rat_to_str(table.values[r])
                      for r in all_outcomes(mask_size(mask))},
        })
    return {"kind": "classical_family", "n": F.n, "marginals": marginals}


def parse_classical_joint(doc) -> JointTable:
    if doc.get("kind") != "classical_joint":
        raise InputError(f"expected kind classical_joint, got {doc.get('kind')!r}")
    n = _require(doc, "n", int, "classical_joint")
    table = _require(doc, "table", dict, "classical_joint")
    values = {}
    for key, raw in table.items():
        values[_parse_bits(key, n, "classical_joint")] = \
            _parse_rational(raw, "classical_joint")
    return JointTable.make(n, values)


def joint_to_payload(P: JointTable) -> dict:
    return {
        "kind": "classical_joint",
        "n": P.n,
        "table": {_bits_key(x): rat_to_str(P.values[x])
                  for x in all_outcomes(P.n)},
    }


# ---------------------------------------------------------------------------
# quantum

def parse_complex_matrix(data, dim, what) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise InputError(f"{what}: expected {dim} rows")
    M = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != dim:
            raise InputError(f"{what}: row {i} must have {dim} entries")
        for j, cell in enumerate(row):
            if (not isinstance(cell, list) or len(cell) != 2
                    or not all(isinstance(v, (int, float))
                               and not isinstance(v, bool) for v in cell)):
                raise InputError(f"{what}: entry ({i},{j}) must be a "
                                 f"[re, im] number pair, got {cell!r}")
            M[i, j] = complex(cell[0], cell[1])
    return M


def matrix_to_pairs(M) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def parse_quantum3(doc, require_psd: bool = True) -> ReducedFamily3:
    if doc.get("kind") != "quantum_family3":
        raise InputError(f"expected kind quantum_family3, got {doc.get('kind')!r}")
    matrices = _require(doc, "matrices", list, "quantum_family3")
    found = {}
    for entry in matrices:
        if not isinstance(entry, dict):
            raise InputError("quantum_family3: each matrix must be an object")
        mask = _parse_subset(entry.get("subset"), 3, "quantum_family3")
        if mask in found:
            raise InputError(f"quantum_family3: subset {entry['subset']} "
                             f"appears twice")
        what = f"matrix for subset {entry['subset']}"
        found[mask] = parse_complex_matrix(
            _require(entry, "data", list, what), 4, what)
    if sorted(found) != [0b011, 0b101, 0b110]:
        raise InputError("quantum_family3: need exactly the subsets "
                         "[1,2], [1,3], [2,3]")
    if require_psd:
        for mask, M in found.items():
            validate_density(
                M, what=f"state of {list(indices_from_mask(mask))}")
    return ReducedFamily3.make(found[0b011], found[0b101], found[0b110])


def family3_to_payload(F: ReducedFamily3) -> dict:
    return {
        "kind": "quantum_family3",
        "matrices": [
            {"subset": [1, 2], "data": matrix_to_pairs(F.rho12)},
            {"subset": [1, 3], "data": matrix_to_pairs(F.rho13)},
            {"subset": [2, 3], "data": matrix_to_pairs(F.rho23)},
        ],
    }


def parse_quantum_family_n(doc, require_psd: bool = True):
    """Returns (n, {subset mask: matrix}) for the generalized operators."""
    if doc.get("kind") != "quantum_family_n":
        raise InputError(f"expected kind quantum_family_n, got {doc.get('kind')!r}")
    n = _require(doc, "n", int, "quantum_family_n")
    if not 1 <= n <= 6:
        raise InputError(f"quantum_family_n: n={n} outside 1..6")
    matrices = _require(doc, "matrices", list, "quantum_family_n")
    family = {}
    for entry in matrices:
        if not isinstance(entry, dict):
            raise InputError("quantum_family_n: each matrix must be an object")
        mask = _parse_subset(entry.get("subset"), n, "quantum_family_n")
        if mask in family:
            raise InputError(f"quantum_family_n: subset {entry['subset']} "
                             f"appears twice")
        what = f"matrix for subset {entry['subset']}"
        dim = 1 << mask_size(mask)
        family[mask] = parse_complex_matrix(
            _require(entry, "data", list, what), dim, what)
        if require_psd:
            validate_density(family[mask], what=what)
    return n, family


def parse_density(doc, require_psd: bool = True) -> np.ndarray:
    if doc.get("kind") != "density":
        raise InputError(f"expected kind density, got {doc.get('kind')!r}")
    n = _require(doc, "n", int, "density")
    data = _require(doc, "data", list, "density")
    M = parse_complex_matrix(data, 1 << n, "density")
    if require_psd:
        validate_density(M, what="density")
    return M


def density_to_payload(rho) -> dict:
    n = qubit_count(rho.shape[0])
    return {"kind": "density", "n": n, "data": matrix_to_pairs(rho)}


# ---------------------------------------------------------------------------
# spectra

def parse_spectra(doc):
    """Returns (criterion or None, list of float lists); range and order
    validation is left to the criterion checkers."""
    if doc.get("kind") != "spectra":
        raise InputError(f"expected kind spectra, got {doc.get('kind')!r}")
    criterion = doc.get("criterion")
    if criterion is not None and criterion not in SPECTRA_CRITERIA:
        raise InputError(f"spectra: unknown criterion {criterion!r}")
    spectra = _require(doc, "spectra", list, "spectra")
    if not spectra or not all(isinstance(s, list) and s for s in spectra):
        raise InputError("spectra: expected a list of non-empty lists")
    out = []
    for i, s in enumerate(spectra):
        vals = []
        for v in s:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise InputError(f"spectra: entry {v!r} in spectrum {i + 1} "
                                 f"is not a number")
            vals.append(float(v))
        out.append(vals)
    return criterion, out


__all__ = [
    "KINDS", "SPECTRA_CRITERIA", "canonical_digest", "load_document",
    "write_json", "parse_classical_family", "family_to_payload",
    "parse_classical_joint", "joint_to_payload", "parse_complex_matrix",
    "matrix_to_pairs", "parse_quantum3", "family3_to_payload",
    "parse_quantum_family_n", "parse_density", "density_to_payload",
    "parse_spectra",
]
