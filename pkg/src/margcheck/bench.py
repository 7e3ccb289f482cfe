"""Kernel benchmark: jitted vs pure-numpy implementations.

Run as ``python -m margcheck.bench``.  Times the Hermitian eigensolver on
batches of random 8x8 matrices and the full projection loop of the probe
on a fixed rank-4 family; numpy's LAPACK eigh is shown for context.  Rows
for the jitted kernels appear only when numba is importable.
"""

import argparse
import time

import numpy as np

from . import _kernels, qcompat
from .qlinalg import _transform_mats

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _random_hermitians(count, dim, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    G = rng.normal(size=(count, dim, dim)) \
        + 1j * rng.normal(size=(count, dim, dim))
    return 0.5 * (G + np.conj(np.transpose(G, (0, 2, 1))))


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eigen(count, repeat):
    mats = _random_hermitians(count, 8, seed=11)
    rows = []

    def run_numpy():
        for H in mats:
            _kernels._jacobi_numpy(H, 1e-14, 100)

    rows.append(("jacobi numpy", _time(run_numpy, repeat)))

    if HAVE_NUMBA and hasattr(_kernels, "_jacobi_numba"):
        _kernels._jacobi_numba(mats[0], 1e-14, 100)  # compile outside timing

        def run_numba():
            for H in mats:
                _kernels._jacobi_numba(H, 1e-14, 100)

        rows.append(("jacobi numba", _time(run_numba, repeat)))

    def run_lapack():
        for H in mats:
            np.linalg.eigh(H)

    rows.append(("lapack eigh (context)", _time(run_lapack, repeat)))
    return count, rows


def bench_probe(repeat):
    rho = qcompat.sample_density(3, 4, seed=2024)
    F = qcompat.ReducedFamily3.from_state(rho)
    targets, fixed = qcompat._probe_targets(F)
    from .qlinalg import PauliCoefficients, pauli_assemble, pauli_expand
    m0 = pauli_assemble(PauliCoefficients(3, targets)).ravel()
    expand_mat, assemble_mat, assemble2, gather = qcompat._probe_static()
    pair_targets = np.stack([pauli_expand(F.rho12, 2).values,
                             pauli_expand(F.rho13, 2).values,
                             pauli_expand(F.rho23, 2).values])
    args = (m0, targets, fixed, expand_mat, assemble_mat,
            gather, pair_targets, assemble2, 2000, 5e-8, 1e-14, 100)
    rows = []

    it, dev, _ = _kernels._dykstra_numpy(*args)
    rows.append((f"probe loop numpy ({it} iterations)",
                 _time(lambda: _kernels._dykstra_numpy(*args), repeat)))

    if HAVE_NUMBA and hasattr(_kernels, "_dykstra_numba"):
        _kernels._dykstra_numba(*args)  # compile outside timing
        rows.append((f"probe loop numba ({it} iterations)",
                     _time(lambda: _kernels._dykstra_numba(*args), repeat)))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m margcheck.bench")
    ap.add_argument("--count", type=int, default=200,
                    help="matrices per eigensolver run (default 200)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="repetitions, best-of reported (default 3)")
    ns = ap.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba not importable; benchmarking the numpy fallback only\n")

    count, rows = bench_eigen(ns.count, ns.repeat)
    print(f"Hermitian eigensolver, {count} random 8x8 matrices "
          f"(best of {ns.repeat}):")
    for name, t in rows:
        print(f"  {name:<26} {t * 1e3:9.2f} ms   "
              f"({t / count * 1e6:8.2f} us/matrix)")

    print("\nSufficiency probe projection loop, rank-4 family "
          f"(best of {ns.repeat}):")
    for name, t in bench_probe(ns.repeat):
        print(f"  {name:<34} {t * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
