"""Kernel backend selection.

MC_BACKEND=numba (default when numba imports) runs the jitted kernels;
MC_BACKEND=numpy forces the pure-numpy fallbacks; auto/unset picks numba
when available.  An explicit numba request without numba installed fails
loudly rather than silently degrading.
"""

import os
import warnings

_requested = os.environ.get("MC_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    warnings.warn(f"MC_BACKEND={_requested!r} not recognized; using auto")
    _requested = "auto"

if _requested == "numpy":
    BACKEND = "numpy"
else:
    try:
        import numba  # noqa: F401
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise ImportError(
                "MC_BACKEND=numba requested but numba is not importable")
        BACKEND = "numpy"


def use_numba() -> bool:
    return BACKEND == "numba"
