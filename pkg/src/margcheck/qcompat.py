"""Compatibility of few-qubit reduced states.

For three qubits the pairwise reductions are compatible with a joint state
only if the operator

    D = 1 - r1 - r2 - r3 + r12 + r13 + r23   (each term embedded into 8x8)

satisfies 0 <= D <= 1; `check_bell_wigner` evaluates that test.  The same
alternating sum generalizes to any odd subset of n parties (`gen_delta`),
and `counterexample_n4` builds the four-qubit family whose generalized
operator has eigenvalue -1/2, showing the condition is not sufficient
at n=4.

`probe_sufficiency` searches for an actual joint state by alternating
projections (Dykstra) between the PSD cone and the affine set of 8x8
Hermitian matrices with the prescribed two-body Pauli coefficients.  It
can certify existence (status "reconstructed") but never refutes it.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .classical import full_mask, indices_from_mask, mask_from_indices
from .errors import (IncompatibleFamilyError, InputError, NumericError,
                     ResourceError)
from .qlinalg import (
    TOL_HERM,
    TOL_PSD,
    _transform_mats,
    embed,
    hermitian_eigen,
    index_codes,
    partial_trace,
    pauli_assemble,
    pauli_expand,
    pauli_index,
    PauliCoefficients,
    qubit_count,
    validate_hermitian,
)

TOL_EQ = 1e-9
TOL_TRACE = 1e-12
PROBE_TOL = 1e-7
PROBE_MAX_ITER = 5000

PAIR_MASKS = (0b011, 0b101, 0b110)  # {1,2}, {1,3}, {2,3}


def _check_unit_trace(M, what):
    tr = M.trace()
    if abs(tr - 1.0) > TOL_TRACE:
        raise InputError(f"{what} has trace {tr:.15g}, expected 1")


@dataclass(frozen=True)
class ReducedFamily3:
    """The three two-qubit reductions of a (hypothetical) three-qubit state.

    Validation covers Hermiticity and unit trace only; indefinite matrices
    are allowed so that the operator tests stay meaningful on perturbed
    input.  Positivity is enforced where files are loaded.
    """
    rho12: np.ndarray
    rho13: np.ndarray
    rho23: np.ndarray

    @classmethod
    def make(cls, rho12, rho13, rho23) -> "ReducedFamily3":
        mats = []
        for label, m in (("state of pair (1,2)", rho12),
                         ("state of pair (1,3)", rho13),
                         ("state of pair (2,3)", rho23)):
            A = validate_hermitian(m, TOL_HERM, label)
            if A.shape != (4, 4):
                raise InputError(f"{label} must be 4x4, got {A.shape}")
            _check_unit_trace(A, label)
            A.setflags(write=False)
            mats.append(A)
        return cls(*mats)

    @classmethod
    def from_state(cls, rho) -> "ReducedFamily3":
        A = validate_hermitian(rho, TOL_HERM, "three-qubit state")
        if A.shape != (8, 8):
            raise InputError(f"expected an 8x8 state, got {A.shape}")
        _check_unit_trace(A, "three-qubit state")
        return cls.make(partial_trace(A, (1, 2), 3),
                        partial_trace(A, (1, 3), 3),
                        partial_trace(A, (2, 3), 3))

    def pair(self, mask: int) -> np.ndarray:
        return {0b011: self.rho12, 0b101: self.rho13,
                0b110: self.rho23}[mask]


@dataclass(frozen=True)
class QuantumVerdict:
    passes: bool
    min_eig: float
    max_eig: float
    witness: np.ndarray | None  # eigenvector of the violating eigenvalue


@dataclass(frozen=True)
class ProbeReport:
    status: str  # "reconstructed" | "undetermined"
    iterations: int
    residual: float
    candidate: np.ndarray | None


def check_q_equimarginal(F: ReducedFamily3, tol_eq: float = TOL_EQ):
    """Largest entrywise disagreement between the two derivations of each
    single-qubit state; returns (within tolerance?, deviation)."""
    derivations = (
        (partial_trace(F.rho12, (1,), 2), partial_trace(F.rho13, (1,), 2)),
        (partial_trace(F.rho12, (2,), 2), partial_trace(F.rho23, (1,), 2)),
        (partial_trace(F.rho13, (2,), 2), partial_trace(F.rho23, (2,), 2)),
    )
    dev = max(np.abs(a - b).max() for a, b in derivations)
    return bool(dev <= tol_eq), float(dev)


def delta_operator(F: ReducedFamily3, tol_eq: float = TOL_EQ) -> np.ndarray:
    """The alternating-sum operator for the full three-qubit set.

    Single-qubit states are derived from the first containing pair in
    subset order (r1, r2 from rho12; r3 from rho13)."""
    ok, dev = check_q_equimarginal(F, tol_eq)
    if not ok:
        raise InputError(
            f"pair states disagree on a common qubit (deviation {dev:.3e} "
            f"> {tol_eq:g})")
    r1 = partial_trace(F.rho12, (1,), 2)
    r2 = partial_trace(F.rho12, (2,), 2)
    r3 = partial_trace(F.rho13, (2,), 2)
    D = np.eye(8, dtype=np.complex128)
    D -= embed(r1, (1,), 3) + embed(r2, (2,), 3) + embed(r3, (3,), 3)
    D += (embed(F.rho12, (1, 2), 3) + embed(F.rho13, (1, 3), 3)
          + embed(F.rho23, (2, 3), 3))
    return D


def check_bell_wigner(F: ReducedFamily3, tol_psd: float = TOL_PSD,
                      tol_eq: float = TOL_EQ) -> QuantumVerdict:
    """Necessary condition for a three-qubit joint state: the alternating
    sum must have spectrum inside [0, 1]."""
    D = delta_operator(F, tol_eq)
    w, V = hermitian_eigen(D)
    lo, hi = float(w[0]), float(w[-1])
    witness = None
    if lo < -tol_psd:
        witness = V[:, 0].copy()
    elif hi > 1.0 + tol_psd:
        witness = V[:, -1].copy()
    return QuantumVerdict(witness is None, lo, hi, witness)


# ---------------------------------------------------------------------------
# generalized operators for n parties

def check_family_equimarginal(family, n: int, tol_eq: float = TOL_EQ):
    """Check every nested pair of supplied subsets for agreement of the
    smaller reduction; returns (within tolerance?, deviation)."""
    masks = sorted(int(m) for m in family)
    dev = 0.0
    for small in masks:
        for big in masks:
            if small == big or (small & big) != small:
                continue
            k = len(indices_from_mask(big))
            keep = tuple(indices_from_mask(big).index(i) + 1
                         for i in indices_from_mask(small))
            red = partial_trace(family[big], keep, k)
            dev = max(dev, float(np.abs(red - family[small]).max()))
    return dev <= tol_eq, dev


def gen_delta(family, A, n: int, tol_eq: float = TOL_EQ):
    """Alternating sum over the stored subsets that complete an odd subset
    A to the full party set; returns (operator, (min_eig, max_eig)).

    `family` maps subset bitmasks to reduced states; it must contain every
    subset (N \\ A) | S for S a proper subset of A (the empty subset, when
    A is the full set, contributes the identity).
    """
    if n < 1 or n > 6:
        raise ResourceError(f"n={n} outside supported range 1..6")
    if isinstance(A, (int, np.integer)):
        a_mask = int(A)
    else:
        a_mask = mask_from_indices(A, n)
    top = full_mask(n)
    if a_mask <= 0 or a_mask > top:
        raise InputError(f"subset mask {a_mask} out of range for n={n}")
    a_size = bin(a_mask).count("1")
    if a_size % 2 == 0:
        raise InputError(f"subset {indices_from_mask(a_mask)} must be odd")

    fam = {}
    for key, m in family.items():
        mask = int(key) if isinstance(key, (int, np.integer)) \
            else mask_from_indices(key, n)
        sz = bin(mask).count("1")
        M = validate_hermitian(m, TOL_HERM, f"state of {indices_from_mask(mask)}")
        if M.shape != (1 << sz, 1 << sz):
            raise InputError(
                f"state of {indices_from_mask(mask)} must be "
                f"{1 << sz}x{1 << sz}, got {M.shape}")
        _check_unit_trace(M, f"state of {indices_from_mask(mask)}")
        fam[mask] = M

    rest = top & ~a_mask
    needed = []
    sub = 0
    while True:  # proper subsets of A, low bits first
        if sub != a_mask:
            needed.append(rest | sub)
        if sub == a_mask:
            break
        sub = (sub - a_mask) & a_mask
    missing = [m for m in needed if m != 0 and m not in fam]
    if missing:
        raise InputError(
            "family is missing subsets "
            + ", ".join(str(indices_from_mask(m)) for m in missing))

    used = {m: fam[m] for m in needed if m != 0}
    ok, dev = check_family_equimarginal(used, n, tol_eq)
    if not ok:
        raise InputError(
            f"stored states disagree on a common reduction "
            f"(deviation {dev:.3e} > {tol_eq:g})")

    dim = 1 << n
    D = np.zeros((dim, dim), dtype=np.complex128)
    for b_mask in needed:
        sign = -1.0 if bin(b_mask & a_mask).count("1") % 2 else 1.0
        if b_mask == 0:
            D += sign * np.eye(dim)
        else:
            D += sign * embed(fam[b_mask], b_mask, n)
    w, _ = hermitian_eigen(D)
    return D, (float(w[0]), float(w[-1]))


# ---------------------------------------------------------------------------
# the four-party counterexample

@dataclass(frozen=True)
class CounterexampleReport:
    psi: np.ndarray          # the four-qubit pure state
    delta: np.ndarray        # generalized operator for A = {2,3,4}
    min_eig: float
    max_eig: float
    witness: np.ndarray      # eigenvector at the minimum
    witness_overlap: float   # |<expected|witness>|^2
    closed_form_residual: float


def counterexample_n4() -> CounterexampleReport:
    """Four-qubit pure state whose generalized operator for A = {2,3,4}
    dips to eigenvalue -1/2 even though all reductions come from an honest
    joint state: passing every odd-subset test is necessary, not sufficient,
    beyond three parties."""
    psi = np.zeros(16, dtype=np.complex128)
    psi[0b0000] = 1 / np.sqrt(2.0)   # |0000>
    psi[0b1100] = 1 / np.sqrt(2.0)   # |1100>  (qubit 1 = leftmost)
    rho = np.outer(psi, psi.conj())

    family = {}
    for mask in (0b0001, 0b0011, 0b0101, 0b1001, 0b0111, 0b1011, 0b1101):
        family[mask] = partial_trace(rho, mask, 4)
    a_mask = 0b1110  # {2,3,4}
    D, (lo, hi) = gen_delta(family, a_mask, 4)

    w, V = hermitian_eigen(D)
    witness = V[:, 0].copy()
    expected = np.zeros(16, dtype=np.complex128)
    expected[0b0011] = 1 / np.sqrt(2.0)
    expected[0b1111] = 1 / np.sqrt(2.0)
    overlap = float(abs(np.vdot(expected, witness)) ** 2)

    # D in closed form: (1/2)(1 - 2 P_phi) x P1 x P1  +  P_phi x P0 x P0,
    # with P_phi the projector onto (|00> + |11>)/sqrt(2) of qubits (1,2).
    phi = np.zeros(4, dtype=np.complex128)
    phi[0b00] = phi[0b11] = 1 / np.sqrt(2.0)
    P_phi = np.outer(phi, phi.conj())
    P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
    closed = (0.5 * np.kron(np.eye(4) - 2 * P_phi, np.kron(P1, P1))
              + np.kron(P_phi, np.kron(P0, P0)))
    residual = float(np.abs(D - closed).max())

    report = CounterexampleReport(psi, D, float(w[0]), float(w[-1]),
                                  witness, overlap, residual)
    if (abs(report.min_eig + 0.5) > 1e-9
            or report.witness_overlap < 1 - 1e-9
            or report.closed_form_residual > 1e-12):
        raise NumericError(
            f"counterexample self-check failed: min_eig={report.min_eig}, "
            f"overlap={report.witness_overlap}, "
            f"closed-form residual={report.closed_form_residual}")
    return report


# ---------------------------------------------------------------------------
# sampling

def sample_density(n_qubits: int, rank: int, seed: int) -> np.ndarray:
    """Normalized G G* for a complex Gaussian dim x rank matrix G, drawn
    from a counter-based generator so results are reproducible across
    processes and platforms."""
    if not 1 <= n_qubits <= 6:
        raise ResourceError(f"n_qubits={n_qubits} outside supported range 1..6")
    dim = 1 << n_qubits
    if not 1 <= rank <= dim:
        raise InputError(f"rank must be in 1..{dim}, got {rank}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    M = G @ G.conj().T
    M /= M.trace().real
    return 0.5 * (M + M.conj().T)


def sample_separable(n_qubits: int, num_terms: int, seed: int) -> np.ndarray:
    """Random convex mixture of product states (one Ginibre factor per
    qubit per term)."""
    if not 1 <= n_qubits <= 6:
        raise ResourceError(f"n_qubits={n_qubits} outside supported range 1..6")
    if num_terms < 1:
        raise InputError("num_terms must be positive")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    weights = rng.random(num_terms)
    weights /= weights.sum()
    dim = 1 << n_qubits
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(num_terms):
        term = np.ones((1, 1), dtype=np.complex128)
        for _ in range(n_qubits):
            G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            f = G @ G.conj().T
            term = np.kron(term, f / f.trace().real)
        rho += weights[k] * term
    return 0.5 * (rho + rho.conj().T)


# ---------------------------------------------------------------------------
# sufficiency probe

@lru_cache(maxsize=1)
def _probe_static():
    """Transform matrices and index maps the projection kernel needs."""
    expand_mat, assemble_mat = _transform_mats(3)
    _, assemble2 = _transform_mats(2)
    gather = np.zeros((3, 16), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            gather[0, 4 * i + j] = pauli_index((i, j, 0))
            gather[1, 4 * i + j] = pauli_index((i, 0, j))
            gather[2, 4 * i + j] = pauli_index((0, i, j))
    return expand_mat, assemble_mat, assemble2, gather


def _probe_targets(F: ReducedFamily3):
    """Fixed Pauli coefficients of any joint state with these reductions:
    identity 1/8, two-body terms read off the pairs, one-body terms the
    average of their two derivations.  Weight-3 strings stay free."""
    c12 = pauli_expand(F.rho12, 2).values
    c13 = pauli_expand(F.rho13, 2).values
    c23 = pauli_expand(F.rho23, 2).values
    targets = np.zeros(64)
    fixed = np.zeros(64, dtype=bool)
    for s in range(64):
        i, j, k = index_codes(s, 3)
        weight = (i != 0) + (j != 0) + (k != 0)
        if weight == 3:
            continue
        fixed[s] = True
        if weight == 0:
            targets[s] = 0.125
        elif k == 0 and j == 0:
            targets[s] = (c12[pauli_index((i, 0))]
                          + c13[pauli_index((i, 0))]) / 4
        elif k == 0 and i == 0:
            targets[s] = (c12[pauli_index((0, j))]
                          + c23[pauli_index((j, 0))]) / 4
        elif i == 0 and j == 0:
            targets[s] = (c13[pauli_index((0, k))]
                          + c23[pauli_index((0, k))]) / 4
        elif k == 0:
            targets[s] = c12[pauli_index((i, j))] / 2
        elif j == 0:
            targets[s] = c13[pauli_index((i, k))] / 2
        else:
            targets[s] = c23[pauli_index((j, k))] / 2
    return targets, fixed


def probe_sufficiency(F: ReducedFamily3, max_iter: int = PROBE_MAX_ITER,
                      tol_probe: float = PROBE_TOL) -> ProbeReport:
    """Alternate projections between the affine slice fixing all weight<=2
    Pauli coefficients and the PSD cone.  Success certifies compatibility;
    running out of iterations is reported as undetermined, never as
    incompatibility."""
    if max_iter < 1:
        raise InputError("max_iter must be positive")
    if tol_probe <= 0:
        raise InputError("tol_probe must be positive")
    verdict = check_bell_wigner(F)
    if not verdict.passes:
        raise IncompatibleFamilyError(
            "family fails the operator test; no joint state exists",
            witness=verdict)

    targets, fixed = _probe_targets(F)
    m0 = pauli_assemble(PauliCoefficients(3, targets)).ravel()
    expand_mat, assemble_mat, assemble2, gather = _probe_static()
    pair_targets = np.stack([pauli_expand(F.rho12, 2).values,
                             pauli_expand(F.rho13, 2).values,
                             pauli_expand(F.rho23, 2).values])
    # the loop watches the same renormalized reduction mismatch the final
    # verification below recomputes, so a safety factor of 2 suffices
    iterations, dev, x = _kernels.dykstra_cycle(
        m0, targets, fixed, expand_mat, assemble_mat,
        gather, pair_targets, assemble2,
        max_iter, tol_probe * 0.5)

    X = x.reshape(8, 8)
    X = 0.5 * (X + X.conj().T)
    tr = X.trace().real
    if tr <= 0.5:
        return ProbeReport("undetermined", iterations, float(dev), None)
    C = X / tr
    mismatch = max(
        float(np.abs(partial_trace(C, mask, 3) - F.pair(mask)).max())
        for mask in PAIR_MASKS)
    w, _ = hermitian_eigen(C)
    residual = max(mismatch, max(0.0, -float(w[0])))
    status = "reconstructed" if residual < tol_probe else "undetermined"
    C.setflags(write=False)
    return ProbeReport(status, int(iterations), residual, C)


__all__ = [
    "TOL_EQ", "PROBE_TOL", "PROBE_MAX_ITER", "PAIR_MASKS",
    "ReducedFamily3", "QuantumVerdict", "ProbeReport",
    "CounterexampleReport", "check_q_equimarginal", "delta_operator",
    "check_bell_wigner", "check_family_equimarginal", "gen_delta",
    "counterexample_n4", "sample_density", "sample_separable",
    "probe_sufficiency",
]
