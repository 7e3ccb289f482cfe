"""Exact rational arithmetic backend.

gmpy2.mpq when available (roughly an order of magnitude faster on the
elimination/pivoting workloads), fractions.Fraction otherwise.  Both types
print as ``p/q`` (or a bare integer) and accept the same string form back,
so everything downstream treats them interchangeably.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    def rat(p, q=1):
        return _mpq(p, q)

    RAT_IMPL = "gmpy2"
except ImportError:  # pragma: no cover - exercised only without gmpy2
    def rat(p, q=1):
        return Fraction(p, q)

    RAT_IMPL = "fractions"

R0 = rat(0)
R1 = rat(1)


def rat_from_str(s):
    """Parse ``p`` or ``p/q`` into an exact rational; reject anything else."""
    if not isinstance(s, str):
        raise TypeError(f"expected a rational string, got {type(s).__name__}")
    try:
        f = Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {s!r}") from exc
    return rat(f.numerator, f.denominator)


def rat_to_str(x):
    return str(x)
