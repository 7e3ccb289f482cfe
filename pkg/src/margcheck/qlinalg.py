"""Dense operator algebra for few-qubit systems.

Conventions match `classical`: qubits are numbered 1..n, qubit 1 is the
most significant bit of a computational-basis index, and subsets travel
as bitmasks (bit i-1 set means qubit i is in the subset).

Operators are plain complex ndarrays.  Pauli-basis coefficients use a
base-4 string index with qubit 1 as the most significant digit
(0=identity, 1=x, 2=y, 3=z).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .classical import indices_from_mask, mask_from_indices
from .errors import InputError, NumericError, ResourceError

TOL_HERM = 1e-12
TOL_PSD = 1e-9
TOL_TRACE = 1e-12
DIM_CAP = 1 << 12

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)


def qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise InputError(f"dimension {dim} is not a power of two >= 2")
    return n


def _as_square(M, what: str) -> np.ndarray:
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"{what} must be a square matrix, got {A.shape}")
    return A


def _subset_indices(subset, n: int):
    """Normalize a subset (bitmask or iterable of 1-based labels) to a
    sorted tuple of labels, validated against n."""
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
        if mask < 0 or mask >= (1 << n):
            raise InputError(f"subset mask {mask} out of range for n={n}")
        return indices_from_mask(mask)
    idx = tuple(sorted(int(i) for i in subset))
    if len(set(idx)) != len(idx):
        raise InputError(f"subset {idx} has repeated members")
    if idx and (idx[0] < 1 or idx[-1] > n):
        raise InputError(f"subset {idx} out of range for n={n}")
    return idx


def tensor(A, B) -> np.ndarray:
    A = _as_square(A, "left factor")
    B = _as_square(B, "right factor")
    if A.shape[0] * B.shape[0] > DIM_CAP:
        raise ResourceError(
            f"tensor product dimension {A.shape[0] * B.shape[0]} exceeds "
            f"cap {DIM_CAP}")
    return np.kron(A, B)


def validate_hermitian(M, tol: float = TOL_HERM, what: str = "matrix"):
    A = _as_square(M, what)
    dev = np.abs(A - A.conj().T).max()
    if dev > tol:
        raise InputError(f"{what} is not Hermitian (deviation {dev:.3e})")
    return A


def validate_density(M, tol_herm: float = TOL_HERM,
                     tol_psd: float = TOL_PSD, what: str = "state"):
    A = validate_hermitian(M, tol_herm, what)
    qubit_count(A.shape[0])
    tr = A.trace()
    if abs(tr - 1.0) > TOL_TRACE:
        raise InputError(f"{what} has trace {tr:.15g}, expected 1")
    w, _ = hermitian_eigen(A)
    if w[0] < -tol_psd:
        raise InputError(
            f"{what} has negative eigenvalue {w[0]:.3e} beyond {tol_psd:g}")
    return A


def partial_trace(rho, keep, n: int | None = None) -> np.ndarray:
    rho = _as_square(rho, "operator")
    if n is None:
        n = qubit_count(rho.shape[0])
    elif (1 << n) != rho.shape[0]:
        raise InputError(f"operator dimension {rho.shape[0]} != 2^{n}")
    keep_idx = _subset_indices(keep, n)
    if not keep_idx:
        raise InputError("cannot trace out every qubit")
    T = rho.reshape((2,) * (2 * n))
    remaining = n
    for i in reversed([i for i in range(1, n + 1) if i not in keep_idx]):
        T = np.trace(T, axis1=i - 1, axis2=remaining + i - 1)
        remaining -= 1
    d = 1 << len(keep_idx)
    return np.ascontiguousarray(T.reshape(d, d))


def embed(op, positions, n: int) -> np.ndarray:
    """Tensor `op` (acting on the listed qubits) with identity on the rest,
    then permute into the global qubit ordering."""
    op = _as_square(op, "operator")
    pos = _subset_indices(positions, n)
    k = qubit_count(op.shape[0])
    if len(pos) != k:
        raise InputError(
            f"operator acts on {k} qubits but {len(pos)} positions given")
    if (1 << n) > DIM_CAP:
        raise ResourceError(f"embedding dimension 2^{n} exceeds {DIM_CAP}")
    rest = [i for i in range(1, n + 1) if i not in pos]
    M = np.kron(op, np.eye(1 << len(rest), dtype=np.complex128))
    current = list(pos) + rest  # qubit owning each axis of M
    src = [current.index(i) for i in range(1, n + 1)]
    T = M.reshape((2,) * (2 * n))
    T = T.transpose(src + [n + s for s in src])
    return np.ascontiguousarray(T.reshape(1 << n, 1 << n))


# ---------------------------------------------------------------------------
# Pauli basis

def pauli_index(codes) -> int:
    s = 0
    for c in codes:
        if not 0 <= int(c) <= 3:
            raise InputError(f"Pauli code {c} not in 0..3")
        s = (s << 2) | int(c)
    return s


def index_codes(s: int, n: int) -> tuple:
    return tuple((s >> (2 * (n - 1 - k))) & 3 for k in range(n))


def string_weight(s: int, n: int) -> int:
    return sum(1 for c in index_codes(s, n) if c != 0)


def string_support(s: int, n: int) -> int:
    """Bitmask of qubits where the string acts non-trivially."""
    mask = 0
    for k, c in enumerate(index_codes(s, n)):
        if c != 0:
            mask |= 1 << k
    return mask


@lru_cache(maxsize=8)
def pauli_basis(n: int) -> np.ndarray:
    """All 4^n Pauli strings as a (4^n, 2^n, 2^n) array, string-index order."""
    if (1 << n) > DIM_CAP:
        raise ResourceError(f"Pauli basis for n={n} exceeds dimension cap")
    out = np.empty((4 ** n, 1 << n, 1 << n), dtype=np.complex128)
    for s in range(4 ** n):
        B = np.ones((1, 1), dtype=np.complex128)
        for c in index_codes(s, n):
            B = np.kron(B, PAULI[c])
        out[s] = B
    out.setflags(write=False)
    return out


# row s of _expand_mat(n) against vec(M) yields tr(B_s M); PAULI[s].T enters
# because vec is row-major.
@lru_cache(maxsize=8)
def _transform_mats(n: int):
    basis = pauli_basis(n)
    d = 1 << n
    expand = basis.transpose(0, 2, 1).reshape(4 ** n, d * d).copy()
    assemble = basis.reshape(4 ** n, d * d).T.copy()
    expand.setflags(write=False)
    assemble.setflags(write=False)
    return expand, assemble


@dataclass(frozen=True)
class PauliCoefficients:
    """Real expansion coefficients of a Hermitian operator, indexed by
    base-4 Pauli string (qubit 1 = most significant digit)."""
    n: int
    values: np.ndarray  # float64, length 4^n

    def coefficient(self, codes) -> float:
        return float(self.values[pauli_index(codes)])

    @property
    def identity_coefficient(self) -> float:
        return float(self.values[0])


def pauli_expand(M, n: int | None = None) -> PauliCoefficients:
    A = validate_hermitian(M, what="operator")
    d = A.shape[0]
    if n is None:
        n = qubit_count(d)
    elif (1 << n) != d:
        raise InputError(f"operator dimension {d} != 2^{n}")
    expand, _ = _transform_mats(n)
    vals = (expand @ A.ravel()).real / d
    vals.setflags(write=False)
    return PauliCoefficients(n, vals)


def pauli_assemble(coeffs: PauliCoefficients) -> np.ndarray:
    n = coeffs.n
    vals = np.asarray(coeffs.values, dtype=np.float64)
    if vals.shape != (4 ** n,):
        raise InputError(
            f"expected {4 ** n} coefficients for n={n}, got {vals.shape}")
    _, assemble = _transform_mats(n)
    d = 1 << n
    return (assemble @ vals.astype(np.complex128)).reshape(d, d)


# ---------------------------------------------------------------------------
# eigensolver

def hermitian_eigen(M, tol: float = TOL_HERM):
    """Eigenvalues (ascending) and orthonormal eigenvectors (as columns)
    of a Hermitian matrix, via the built-in Jacobi kernels."""
    A = validate_hermitian(M, tol, "operator")
    A = 0.5 * (A + A.conj().T)
    w, V, _, off = _kernels.jacobi_eigh(A)
    if off >= _kernels.JACOBI_OFF_TOL:
        raise NumericError(
            f"Jacobi sweep limit hit with off-diagonal norm {off:.3e}")
    return w, V


# ---------------------------------------------------------------------------
# antiunitary spin flip

def universal_not(psi) -> np.ndarray:
    """Antiunitary map sending every single-qubit state to its orthogonal
    complement, applied to all three qubits of an 8-component vector."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.shape[0] != 8:
        raise InputError(f"expected a 3-qubit vector (length 8), got {v.shape}")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-9:
        raise InputError(f"vector norm {nrm:.12g} is not 1")
    out = np.empty(8, dtype=np.complex128)
    for idx in range(8):
        sign = -1.0 if bin(idx).count("1") % 2 else 1.0
        out[7 - idx] = sign * np.conj(v[idx])
    return out


def conjugate_by_tau(rho) -> np.ndarray:
    """Conjugate a 3-qubit operator by the antiunitary spin flip: in the
    Pauli expansion this negates every odd-weight coefficient."""
    A = validate_hermitian(rho, what="operator")
    if A.shape[0] != 8:
        raise InputError(f"expected an 8x8 operator, got {A.shape}")
    coef = pauli_expand(A, 3)
    vals = coef.values.copy()
    for s in range(64):
        if string_weight(s, 3) % 2:
            vals[s] = -vals[s]
    return pauli_assemble(PauliCoefficients(3, vals))


__all__ = [
    "PAULI", "TOL_HERM", "TOL_PSD", "TOL_TRACE", "DIM_CAP",
    "qubit_count", "tensor", "validate_hermitian", "validate_density",
    "partial_trace", "embed", "pauli_index", "index_codes", "string_weight",
    "string_support", "pauli_basis", "PauliCoefficients", "pauli_expand",
    "pauli_assemble", "hermitian_eigen", "universal_not", "conjugate_by_tau",
    "mask_from_indices", "indices_from_mask",
]
