"""Spectral compatibility criteria for one-party marginal problems.

Each checker takes eigenvalue lists (ascending) and evaluates a fixed
family of linear inequalities.  All comparisons use an absolute tolerance:
a value within TOL above a bound still satisfies it, so spectra coming out
of floating-point eigensolvers don't fail on roundoff.

`check_hzg` is a necessary condition only; its verdict field is named
accordingly and a pass proves nothing about compatibility.
"""

from dataclasses import dataclass
from itertools import permutations

from .errors import InputError

TOL = 1e-12


@dataclass(frozen=True)
class CriterionVerdict:
    compatible: bool
    failed_inequality: str | None = None


@dataclass(frozen=True)
class NecessityVerdict:
    consistent_with_necessity: bool
    failed_inequality: str | None = None


def _as_floats(values, what):
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError) as e:
        raise InputError(f"{what} must be a list of numbers: {e}")
    if not out:
        raise InputError(f"{what} is empty")
    return out


def _validate_spectrum(values, what, length=None, full=True):
    vals = _as_floats(values, what)
    if length is not None and len(vals) != length:
        raise InputError(f"{what} must have {length} entries, got {len(vals)}")
    for i, v in enumerate(vals):
        if v < -TOL or v > 1.0 + TOL:
            raise InputError(f"{what}[{i}] = {v} outside [0, 1]")
        if i and v < vals[i - 1] - TOL:
            raise InputError(f"{what} is not sorted ascending at index {i}")
    if full and abs(sum(vals) - 1.0) > TOL:
        raise InputError(f"{what} sums to {sum(vals)}, expected 1")
    return vals


def check_polygon(lams) -> CriterionVerdict:
    """Each smaller one-qubit eigenvalue must not exceed the sum of the
    others; necessary and sufficient for a pure joint state."""
    vals = _as_floats(lams, "eigenvalue list")
    if len(vals) < 2:
        raise InputError("need at least two parties")
    for i, v in enumerate(vals):
        if v < -TOL:
            raise InputError(f"eigenvalue {v} is negative")
        if v > 0.5 + TOL:
            raise InputError(
                f"eigenvalue {v} exceeds 1/2; pass the smaller eigenvalue "
                f"of each qubit")
    total = sum(vals)
    for i, v in enumerate(vals):
        rest = total - v
        if v > rest + TOL:
            return CriterionVerdict(False, (
                f"polygon: lam_{i + 1} <= sum of others "
                f"({v:.12g} > {rest:.12g})"))
    return CriterionVerdict(True)


# per-party aggregates for the three-qutrit test; spectra ascending
def _higuchi_aggregates(vals):
    l1, l2, l3 = vals
    return {
        "alpha": l1 + l2,
        "beta": l1 + l3,
        "gamma": l2 + l3,
        "delta": l1 + 2 * l2,
        "epsilon": 2 * l1 + l2,
        "zeta": 2 * l2 + l3,
        "eta": 2 * l3 + l2,
    }


# (lhs, term_b, term_c) names; the third line shares its right side with
# the second by design of the source criterion
_HIGUCHI_FAMILIES = (
    ("alpha", "alpha", "alpha"),
    ("beta", "alpha", "beta"),
    ("gamma", "alpha", "beta"),
    ("delta", "delta", "delta"),
    ("epsilon", "delta", "epsilon"),
    ("zeta", "delta", "zeta"),
    ("zeta", "epsilon", "eta"),
)


def check_higuchi(s1, s2, s3) -> CriterionVerdict:
    """Pure three-qutrit compatibility: seven inequality families over all
    ordered party assignments (42 inequalities)."""
    parties = [
        _higuchi_aggregates(_validate_spectrum(s, f"spectrum {i + 1}", 3))
        for i, s in enumerate((s1, s2, s3))
    ]
    for fam, (fa, fb, fc) in enumerate(_HIGUCHI_FAMILIES, start=1):
        for a, b, c in permutations((0, 1, 2)):
            lhs = parties[a][fa]
            rhs = parties[b][fb] + parties[c][fc]
            if lhs > rhs + TOL:
                return CriterionVerdict(False, (
                    f"higuchi: {fa}_a <= {fb}_b + {fc}_c with "
                    f"a={a + 1}, b={b + 1}, c={c + 1} "
                    f"({lhs:.12g} > {rhs:.12g}) [family {fam}]"))
    return CriterionVerdict(True)


def check_bravyi(l1, l2, s3) -> CriterionVerdict:
    """Two-qubit-plus-four-level compatibility for a pure joint state."""
    for name, v in (("l1", l1), ("l2", l2)):
        try:
            v = float(v)
        except (TypeError, ValueError) as e:
            raise InputError(f"{name} must be a number: {e}")
        if v < -TOL or v > 0.5 + TOL:
            raise InputError(f"{name} = {v} outside [0, 1/2]")
    l1, l2 = float(l1), float(l2)
    lam3, mu3, nu3, xi3 = _validate_spectrum(s3, "third-party spectrum", 4)
    for name, v in (("lam_1", l1), ("lam_2", l2)):
        if v < lam3 + mu3 - TOL:
            return CriterionVerdict(False, (
                f"bravyi: {name} >= lam_3 + mu_3 "
                f"({v:.12g} < {lam3 + mu3:.12g})"))
    rhs = 2 * lam3 + mu3 + nu3
    if l1 + l2 < rhs - TOL:
        return CriterionVerdict(False, (
            f"bravyi: lam_1 + lam_2 >= 2*lam_3 + mu_3 + nu_3 "
            f"({l1 + l2:.12g} < {rhs:.12g})"))
    bound = min(nu3 - lam3, xi3 - mu3)
    if abs(l1 - l2) > bound + TOL:
        return CriterionVerdict(False, (
            f"bravyi: |lam_1 - lam_2| <= min(nu_3 - lam_3, xi_3 - mu_3) "
            f"({abs(l1 - l2):.12g} > {bound:.12g})"))
    return CriterionVerdict(True)


def check_hzg(spectra, m: int | None = None) -> NecessityVerdict:
    """Partial-sum inequalities for n parties of local dimension m.

    Necessary only: a failure proves the spectra incompatible with any
    pure joint state, a pass proves nothing.  With m=2 the condition set
    is exactly the polygon inequalities."""
    if len(spectra) < 2:
        raise InputError("need at least two spectra")
    if m is None:
        m = len(spectra[0])
    vals = [_validate_spectrum(s, f"spectrum {i + 1}", m)
            for i, s in enumerate(spectra)]
    n = len(vals)
    # Sum over all but the largest eigenvalue, per party
    head = [sum(v[:m - 1]) for v in vals]
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            others = sum(head[c] for c in range(n) if c not in (a, b))
            for p in range(1, m):
                lhs = sum(vals[a][:p])
                rhs = sum(vals[b][:p]) + others
                if lhs > rhs + TOL:
                    return NecessityVerdict(False, (
                        f"hzg: partial sums with a={a + 1}, b={b + 1}, "
                        f"p={p} ({lhs:.12g} > {rhs:.12g})"))
    return NecessityVerdict(True)


def check_coleman(spec, n_fermions: int) -> CriterionVerdict:
    """One-particle eigenvalues of an n-fermion state are capped at 1/n."""
    if int(n_fermions) != n_fermions or n_fermions < 1:
        raise InputError(f"n_fermions must be a positive integer, "
                         f"got {n_fermions}")
    n_fermions = int(n_fermions)
    vals = _validate_spectrum(spec, "spectrum")
    cap = 1.0 / n_fermions
    for i, v in enumerate(vals):
        if v > cap + TOL:
            return CriterionVerdict(False, (
                f"coleman: eigenvalue {v:.12g} exceeds 1/{n_fermions}"))
    return CriterionVerdict(True)


__all__ = [
    "TOL", "CriterionVerdict", "NecessityVerdict", "check_polygon",
    "check_higuchi", "check_bravyi", "check_hzg", "check_coleman",
]
