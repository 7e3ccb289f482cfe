"""Hot numerical kernels with numba and pure-numpy implementations.

Two kernels live here: a cyclic Jacobi eigensolver for Hermitian matrices
(complex rotations, annihilating one off-diagonal pair at a time) and the
alternating-projection loop of the sufficiency probe (Dykstra's scheme on
the PSD cone and an affine slice of fixed Pauli coefficients).

Both kernels return raw diagnostics and never raise; callers interpret
convergence.  Eigenvalues come back unsorted -- `qlinalg.hermitian_eigen`
sorts.
"""

import numpy as np

from ._backend import use_numba

JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


# ---------------------------------------------------------------------------
# pure-numpy implementations

def _jacobi_numpy(H, off_tol, max_sweeps):
    n = H.shape[0]
    A = np.array(H, dtype=np.complex128)
    V = np.eye(n, dtype=np.complex128)
    off = 0.0
    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * (np.abs(np.triu(A, 1)) ** 2).sum())
        if off < off_tol:
            return np.diag(A).real.copy(), V, sweep, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                ab = abs(b)
                if ab < 1e-300:
                    continue
                phase = b / ab
                # tangent of the rotation angle: smaller root keeps |t| <= 1
                tau = (A[q, q].real - A[p, p].real) / (2.0 * ab)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * np.conj(phase) * colq
                A[:, q] = s * phase * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * phase * rowq
                A[q, :] = s * np.conj(phase) * rowp + c * rowq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * np.conj(phase) * vq
                V[:, q] = s * phase * vp + c * vq
    off = np.sqrt(2.0 * (np.abs(np.triu(A, 1)) ** 2).sum())
    return np.diag(A).real.copy(), V, max_sweeps, off


def _pair_mismatch_numpy(cx, pair_gather, pair_targets, assemble2):
    """Entrywise mismatch between the two-qubit reductions of the iterate
    (trace-renormalized) and the target pair coefficients."""
    c0 = cx[0]
    if c0 <= 1e-6:
        return np.inf
    scale = 0.125 / c0
    worst = 0.0
    for g in range(pair_gather.shape[0]):
        d = 2.0 * scale * cx[pair_gather[g]] - pair_targets[g]
        M = assemble2 @ d.astype(np.complex128)
        worst = max(worst, np.abs(M).max())
    return worst


def _dykstra_numpy(m0, targets, fixed, expand_mat, assemble_mat,
                   pair_gather, pair_targets, assemble2,
                   max_iter, stop_tol, off_tol, max_sweeps):
    """One projection cycle = affine overwrite, then PSD clip.

    Ending the cycle on the PSD cone makes the iterate exactly PSD, so the
    only residual left to watch is the reduction mismatch.
    """
    dim = int(np.sqrt(m0.shape[0]))
    x = m0.copy()
    p_corr = np.zeros_like(m0)
    q_corr = np.zeros_like(m0)
    dev = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        w1 = x + q_corr
        coef = (expand_mat @ w1).real / dim
        coef[fixed] = targets[fixed]
        z = assemble_mat @ coef.astype(np.complex128)
        q_corr = w1 - z

        w2 = z + p_corr
        H = w2.reshape(dim, dim)
        H = 0.5 * (H + H.conj().T)
        lam, V, _, _ = _jacobi_numpy(H, off_tol, max_sweeps)
        lam = np.maximum(lam, 0.0)
        Y = (V * lam) @ V.conj().T
        x = Y.ravel()
        p_corr = w2 - x

        cx = (expand_mat @ x).real / dim
        dev = _pair_mismatch_numpy(cx, pair_gather, pair_targets, assemble2)
        if dev < stop_tol:
            break
    return it, dev, x


# ---------------------------------------------------------------------------
# numba implementations (compiled only when selected)

if use_numba():
    from numba import njit

    @njit(cache=True)
    def _jacobi_numba(H, off_tol, max_sweeps):
        n = H.shape[0]
        A = H.astype(np.complex128)
        V = np.eye(n, dtype=np.complex128)
        off = 0.0
        sweeps = max_sweeps
        for sweep in range(max_sweeps):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * (A[p, q].real ** 2 + A[p, q].imag ** 2)
            off = np.sqrt(off)
            if off < off_tol:
                sweeps = sweep
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    b = A[p, q]
                    ab = abs(b)
                    if ab < 1e-300:
                        continue
                    phase = b / ab
                    tau = (A[q, q].real - A[p, p].real) / (2.0 * ab)
                    if tau >= 0.0:
                        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * np.conj(phase) * akq
                        A[k, q] = s * phase * akp + c * akq
                    for k in range(n):
                        apk = A[p, k]
                        aqk = A[q, k]
                        A[p, k] = c * apk - s * phase * aqk
                        A[q, k] = s * np.conj(phase) * apk + c * aqk
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = c * vkp - s * np.conj(phase) * vkq
                        V[k, q] = s * phase * vkp + c * vkq
        w = np.empty(n, dtype=np.float64)
        for i in range(n):
            w[i] = A[i, i].real
        return w, V, sweeps, off

    @njit(cache=True)
    def _pair_mismatch_numba(cx, pair_gather, pair_targets, assemble2):
        c0 = cx[0].real / 8.0
        if c0 <= 1e-6:
            return np.inf
        scale = 0.125 / c0
        worst = 0.0
        d = np.empty(16, dtype=np.complex128)
        for g in range(pair_gather.shape[0]):
            for s in range(16):
                d[s] = 2.0 * scale * (cx[pair_gather[g, s]].real / 8.0) \
                    - pair_targets[g, s]
            M = np.dot(assemble2, d)
            for s in range(16):
                v = abs(M[s])
                if v > worst:
                    worst = v
        return worst

    @njit(cache=True)
    def _dykstra_numba(m0, targets, fixed, expand_mat, assemble_mat,
                       pair_gather, pair_targets, assemble2,
                       max_iter, stop_tol, off_tol, max_sweeps):
        m = m0.shape[0]
        dim = int(np.sqrt(m + 0.5))
        x = m0.copy()
        p_corr = np.zeros(m, dtype=np.complex128)
        q_corr = np.zeros(m, dtype=np.complex128)
        dev = np.inf
        it = 0
        for it in range(1, max_iter + 1):
            w1 = x + q_corr
            cw = np.dot(expand_mat, w1)
            coef = np.empty(m, dtype=np.complex128)
            for s in range(m):
                if fixed[s]:
                    coef[s] = targets[s]
                else:
                    coef[s] = cw[s].real / dim
            z = np.dot(assemble_mat, coef)
            for s in range(m):
                q_corr[s] = w1[s] - z[s]

            w2 = z + p_corr
            H = np.empty((dim, dim), dtype=np.complex128)
            for i in range(dim):
                for j in range(dim):
                    H[i, j] = 0.5 * (w2[i * dim + j] +
                                     np.conj(w2[j * dim + i]))
            lam, V, _, _ = _jacobi_numba(H, off_tol, max_sweeps)
            for k in range(dim):
                if lam[k] < 0.0:
                    lam[k] = 0.0
            for i in range(dim):
                for j in range(dim):
                    acc = 0.0 + 0.0j
                    for k in range(dim):
                        acc += V[i, k] * lam[k] * np.conj(V[j, k])
                    x[i * dim + j] = acc
            for s in range(m):
                p_corr[s] = w2[s] - x[s]

            cx = np.dot(expand_mat, x)
            dev = _pair_mismatch_numba(cx, pair_gather, pair_targets,
                                       assemble2)
            if dev < stop_tol:
                break
        return it, dev, x


# ---------------------------------------------------------------------------
# dispatch

def jacobi_eigh(H, off_tol=JACOBI_OFF_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decompose a Hermitian matrix; returns (w, V, sweeps, off)
    with eigenvalues ascending and V's columns the matching vectors."""
    if use_numba():
        w, V, sweeps, off = _jacobi_numba(
            np.ascontiguousarray(H, dtype=np.complex128), off_tol, max_sweeps)
    else:
        w, V, sweeps, off = _jacobi_numpy(H, off_tol, max_sweeps)
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order], sweeps, off


def dykstra_cycle(m0, targets, fixed, expand_mat, assemble_mat,
                  pair_gather, pair_targets, assemble2,
                  max_iter, stop_tol,
                  off_tol=JACOBI_OFF_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Run the alternating-projection loop; returns (iterations, dev, x)
    where dev is the reduction mismatch of the final PSD iterate after
    trace renormalization."""
    args = (np.ascontiguousarray(m0, dtype=np.complex128),
            np.ascontiguousarray(targets, dtype=np.float64),
            np.ascontiguousarray(fixed, dtype=np.bool_),
            np.ascontiguousarray(expand_mat, dtype=np.complex128),
            np.ascontiguousarray(assemble_mat, dtype=np.complex128),
            np.ascontiguousarray(pair_gather, dtype=np.int64),
            np.ascontiguousarray(pair_targets, dtype=np.float64),
            np.ascontiguousarray(assemble2, dtype=np.complex128),
            int(max_iter), float(stop_tol), float(off_tol), int(max_sweeps))
    if use_numba():
        return _dykstra_numba(*args)
    return _dykstra_numpy(*args)
