"""Marginal tables on binary variables over exact rationals, and the
compatibility conditions deciding whether a family of subset marginals
extends to a joint distribution.

Subsets of variables are int bitmasks: bit i-1 stands for variable i
(1-based, matching subset lists in instance files).  Outcomes are tuples
of 0/1 of length n, ordered by binary value with x_1 as the most
significant bit.  All arithmetic is exact; no operation here rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional

from ._rat import R0, R1, rat
from .errors import EquimarginalityError, IncompatibleFamilyError, InputError

MAX_VARS = 6  # every check enumerates 2^n outcomes; keep that honest


# ---------------------------------------------------------------------------
# masks and outcomes

def mask_from_indices(indices: Iterable[int], n: int) -> int:
    m = 0
    for i in indices:
        if not 1 <= i <= n:
            raise InputError(f"variable index {i} outside 1..{n}")
        m |= 1 << (i - 1)
    return m


def indices_from_mask(mask: int) -> tuple:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def mask_size(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def submasks(mask: int):
    """All submasks of `mask`, ascending by value."""
    return [s for s in range(mask + 1) if s & mask == s]


def all_outcomes(n: int) -> list:
    return [index_to_outcome(i, n) for i in range(1 << n)]


def outcome_to_index(x) -> int:
    idx = 0
    for b in x:
        idx = idx << 1 | b
    return idx


def index_to_outcome(idx: int, n: int) -> tuple:
    return tuple(idx >> (n - i) & 1 for i in range(1, n + 1))


def _validate_outcome(x, n: int):
    if len(x) != n:
        raise InputError(f"outcome has length {len(x)}, expected {n}")
    if any(b not in (0, 1) for b in x):
        raise InputError(f"outcome entries must be 0 or 1: {x}")


def _validate_mask(mask: int, n: int):
    if not 0 <= mask <= full_mask(n):
        raise InputError(f"subset mask {mask} outside range for n={n}")


def sigma_eval(A: int, x) -> int:
    """Parity sign prod_{i in A} (-1)^{x_i}; +1 for the empty subset."""
    _validate_outcome(x, len(x))
    _validate_mask(A, len(x))
    ones = 0
    for i in range(len(x)):
        if A >> i & 1:
            ones += x[i]
    return -1 if ones & 1 else 1


def flip(A: int, x) -> tuple:
    """Toggle the bits of x at the positions in A (an involution)."""
    _validate_outcome(x, len(x))
    _validate_mask(A, len(x))
    return tuple(1 - b if A >> i & 1 else b for i, b in enumerate(x))


# ---------------------------------------------------------------------------
# tables

@dataclass(frozen=True)
class MarginalTable:
    """Distribution of the variables in `subset`, keyed by their restrictions
    (bits in ascending member order), viewed as a function on full outcomes
    that ignores the other variables."""

    n: int
    subset: int
    values: Mapping  # restriction tuple -> rational

    @classmethod
    def make(cls, n: int, subset: int, values: Mapping) -> "MarginalTable":
        if not 1 <= n <= MAX_VARS:
            raise InputError(f"n={n} outside 1..{MAX_VARS}")
        _validate_mask(subset, n)
        k = mask_size(subset)
        if len(values) != 1 << k:
            raise InputError(
                f"table for subset {indices_from_mask(subset)} has "
                f"{len(values)} entries, expected {1 << k}")
        ordered = {}
        total = R0
        for r in all_outcomes(k) if k else [()]:
            if r not in values:
                raise InputError(f"missing table entry for restriction {r}")
            v = rat(values[r])
            if v < 0:
                raise InputError(f"negative probability {v} at {r}")
            ordered[r] = v
            total += v
        if total != R1:
            raise InputError(f"table sums to {total}, expected 1")
        return cls(n, subset, ordered)

    def members(self) -> tuple:
        return indices_from_mask(self.subset)

    def restriction_of(self, x) -> tuple:
        return tuple(x[i - 1] for i in self.members())

    def evaluate(self, x):
        """Value at a full outcome (depends only on the subset's bits)."""
        _validate_outcome(x, self.n)
        return self.values[self.restriction_of(x)]

    def marginalize(self, sub: int) -> "MarginalTable":
        """Sum out the members not in `sub` (requires sub ⊆ subset)."""
        if sub & self.subset != sub:
            raise InputError("can only marginalize to a subset of the table's subset")
        pos = [self.members().index(i) for i in indices_from_mask(sub)]
        out = {r: R0 for r in (all_outcomes(len(pos)) if pos else [()])}
        for r, v in self.values.items():
            out[tuple(r[p] for p in pos)] += v
        return MarginalTable(self.n, sub, out)


@dataclass(frozen=True)
class JointTable:
    """Full distribution on {0,1}^n."""

    n: int
    values: Mapping  # outcome tuple -> rational

    @classmethod
    def make(cls, n: int, values: Mapping) -> "JointTable":
        if not 1 <= n <= MAX_VARS:
            raise InputError(f"n={n} outside 1..{MAX_VARS}")
        if len(values) != 1 << n:
            raise InputError(f"joint table has {len(values)} entries, expected {1 << n}")
        ordered = {}
        total = R0
        for x in all_outcomes(n):
            if x not in values:
                raise InputError(f"missing joint entry for {x}")
            v = rat(values[x])
            if v < 0:
                raise InputError(f"negative probability {v} at {x}")
            ordered[x] = v
            total += v
        if total != R1:
            raise InputError(f"joint sums to {total}, expected 1")
        return cls(n, ordered)

    def evaluate(self, x):
        _validate_outcome(x, self.n)
        return self.values[tuple(x)]


@dataclass(frozen=True)
class MarginalFamily:
    """A collection of subset marginals; the full set {1..n} is never stored
    (the empty subset is implicitly the constant 1)."""

    n: int
    tables: Mapping  # subset mask -> MarginalTable, ascending mask order

    @classmethod
    def make(cls, n: int, tables: Iterable[MarginalTable]) -> "MarginalFamily":
        if not 1 <= n <= MAX_VARS:
            raise InputError(f"n={n} outside 1..{MAX_VARS}")
        by_mask = {}
        for t in tables:
            if t.n != n:
                raise InputError(f"table for {t.members()} built for n={t.n}, family has n={n}")
            if t.subset == full_mask(n):
                raise InputError("the full subset may not be stored as a marginal")
            if t.subset == 0:
                raise InputError("the empty subset is implicit and may not be stored")
            if t.subset in by_mask:
                raise InputError(f"duplicate table for subset {t.members()}")
            by_mask[t.subset] = t
        if not by_mask:
            raise InputError("family holds no tables")
        return cls(n, {m: by_mask[m] for m in sorted(by_mask)})

    def stored_masks(self) -> list:
        return list(self.tables)


@dataclass(frozen=True)
class SigmaCoefficients:
    """Coefficients of the parity-function expansion P = sum_A c_A sigma_A."""

    n: int
    coeffs: Mapping  # subset mask -> rational


class Witness(NamedTuple):
    kind: str       # which inequality family produced it
    subset: int     # the subset A of the failed inequality (0 if none applies)
    outcome: tuple  # the full outcome at which it failed
    value: object   # the exact out-of-range value


class EquimarginalWitness(NamedTuple):
    subset_a: int
    subset_b: int
    common: int
    restriction: tuple  # bits of the common members, ascending
    value_a: object
    value_b: object


@dataclass(frozen=True)
class ClassicalVerdict:
    compatible: bool
    witness: Optional[Witness] = None
    certificate: Optional[JointTable] = None


# ---------------------------------------------------------------------------
# marginalization and equimarginality

def marginalize(P: JointTable, A: int) -> MarginalTable:
    """Marginal of a joint on the proper subset A (full set rejected)."""
    _validate_mask(A, P.n)
    if A == full_mask(P.n):
        raise InputError("marginalize to the full set is the identity; not stored as a table")
    idx = indices_from_mask(A)
    out = {r: R0 for r in (all_outcomes(len(idx)) if idx else [()])}
    for x, v in P.values.items():
        out[tuple(x[i - 1] for i in idx)] += v
    return MarginalTable(P.n, A, out)


def derived_tables(F: MarginalFamily) -> dict:
    """Tables for every nonempty submask of the stored subsets.

    Each is derived from the first stored table (ascending mask) containing
    it; uniqueness of the result is what check_equimarginal decides."""
    out = {}
    for m, t in F.tables.items():
        for s in submasks(m):
            if s and s not in out:
                out[s] = t if s == m else t.marginalize(s)
    return {s: out[s] for s in sorted(out)}


def check_equimarginal(F: MarginalFamily):
    """True iff all pairs of stored tables agree on every common sub-subset;
    otherwise (False, witness) naming the first disagreement."""
    masks = F.stored_masks()
    for ai in range(len(masks)):
        for bi in range(ai + 1, len(masks)):
            a, b = masks[ai], masks[bi]
            common = a & b
            if common == 0:
                continue
            ta = F.tables[a].marginalize(common)
            tb = F.tables[b].marginalize(common)
            for r in ta.values:
                if ta.values[r] != tb.values[r]:
                    return False, EquimarginalWitness(a, b, common, r,
                                                      ta.values[r], tb.values[r])
    return True, None


def _require_equimarginal(F: MarginalFamily):
    ok, wit = check_equimarginal(F)
    if not ok:
        raise EquimarginalityError(
            f"stored marginals for {indices_from_mask(wit.subset_a)} and "
            f"{indices_from_mask(wit.subset_b)} disagree on "
            f"{indices_from_mask(wit.common)} at {wit.restriction}: "
            f"{wit.value_a} vs {wit.value_b}", witness=wit)


def _proper_grids(F: MarginalFamily):
    """(outcomes, {mask: values-by-outcome-index}) for every proper nonempty
    subset; requires the family to determine all of them."""
    der = derived_tables(F)
    n = F.n
    missing = [m for m in range(1, full_mask(n)) if m not in der]
    if missing:
        raise InputError(
            "family does not determine marginals for subsets: "
            + ", ".join(str(indices_from_mask(m)) for m in missing))
    outcomes = all_outcomes(n)
    grids = {}
    for m, t in der.items():
        idx = [i - 1 for i in indices_from_mask(m)]
        vals = t.values
        grids[m] = [vals[tuple(x[i] for i in idx)] for x in outcomes]
    return outcomes, grids


# ---------------------------------------------------------------------------
# parity-expansion coefficients

def coefficients_from_family(F: MarginalFamily) -> SigmaCoefficients:
    """Expansion coefficients c_B for every subset B derivable from F,
    via inclusion-exclusion over derived marginals at the all-zeros outcome
    (where every parity sign is +1)."""
    _require_equimarginal(F)
    der = derived_tables(F)
    zeros = (0,) * F.n
    n = F.n
    coeffs = {0: rat(1, 1 << n)}
    for B in sorted(der):
        total = R0
        for D in submasks(B):
            p = R1 if D == 0 else der[D].evaluate(zeros)
            term = p / rat(1 << (n - mask_size(D)))
            total += -term if (mask_size(B) - mask_size(D)) & 1 else term
        coeffs[B] = total
    return SigmaCoefficients(n, coeffs)


def coefficients_from_joint(P: JointTable) -> SigmaCoefficients:
    """All 2^n expansion coefficients of a joint: c_B = 2^{-n} sum_x P(x) sigma_B(x)."""
    n = P.n
    scale = rat(1, 1 << n)
    coeffs = {}
    for B in range(1 << n):
        total = R0
        for x, v in P.values.items():
            total += v if sigma_eval(B, x) == 1 else -v
        coeffs[B] = total * scale
    return SigmaCoefficients(n, coeffs)


def joint_from_coefficients(C: SigmaCoefficients) -> JointTable:
    """Assemble P(x) = sum_B c_B sigma_B(x); rejects non-distributions."""
    n = C.n
    need = full_mask(n)
    missing = [B for B in range(need + 1) if B not in C.coeffs]
    if missing:
        raise InputError(f"missing coefficients for {len(missing)} subsets")
    values = {}
    for x in all_outcomes(n):
        s = R0
        for B, c in C.coeffs.items():
            s += c if sigma_eval(B, x) == 1 else -c
        values[x] = s
    return JointTable.make(n, values)


def family_from_coefficients(C: SigmaCoefficients, subsets: Iterable[int]) -> MarginalFamily:
    """Build the marginal tables of the given subsets directly from expansion
    coefficients: P_A = 2^{n-|A|} sum_{B ⊆ A} c_B sigma_B.  The subsets need
    not extend to a joint; invalid (negative) tables are rejected."""
    n = C.n
    if C.coeffs.get(0) != rat(1, 1 << n):
        raise InputError("empty-subset coefficient must be 2^-n for normalized tables")
    tables = []
    for A in subsets:
        _validate_mask(A, n)
        k = mask_size(A)
        idx = [i - 1 for i in indices_from_mask(A)]
        scale = rat(1 << (n - k))
        values = {}
        for r in (all_outcomes(k) if k else [()]):
            x = [0] * n
            for p, b in zip(idx, r):
                x[p] = b
            x = tuple(x)
            s = R0
            for B in submasks(A):
                c = C.coeffs.get(B)
                if c is None:
                    raise InputError(f"coefficient for subset {indices_from_mask(B)} not derivable")
                s += c if sigma_eval(B, x) == 1 else -c
            values[r] = s * scale
        tables.append(MarginalTable.make(n, A, values))
    return MarginalFamily.make(n, tables)


# ---------------------------------------------------------------------------
# the three-variable pair conditions

_PAIR_MASKS3 = (0b011, 0b101, 0b110)


def _require_pairwise3(F: MarginalFamily):
    if F.n != 3:
        raise InputError(f"pairwise check needs n=3, got n={F.n}")
    if any(m not in F.tables for m in _PAIR_MASKS3):
        raise InputError("family must store the three pair tables {1,2}, {1,3}, {2,3}")
    _require_equimarginal(F)


def check_wigner(F: MarginalFamily) -> ClassicalVerdict:
    """All pair-consistency inequalities
    P_ab(x_a,x_b) <= P_ac(x_a,x_c) + P_bc(x_b, 1-x_c) over the three subset
    permutations and all arguments; first violation wins."""
    _require_pairwise3(F)
    T = F.tables
    for a, b, c in ((1, 2, 3), (1, 3, 2), (2, 3, 1)):
        mab = mask_from_indices((a, b), 3)
        mac = mask_from_indices((a, c), 3)
        mbc = mask_from_indices((b, c), 3)
        cmask = 1 << (c - 1)
        for x in all_outcomes(3):
            lhs = T[mab].evaluate(x)
            rhs = T[mac].evaluate(x) + T[mbc].evaluate(flip(cmask, x))
            if lhs > rhs:
                return ClassicalVerdict(False, Witness("wigner", mab, x, lhs - rhs))
    return ClassicalVerdict(True)


def delta3(F: MarginalFamily, x) -> object:
    """1 - P_1 - P_2 - P_3 + P_12 + P_13 + P_23 at x, singles derived from
    the pair tables; equals P(x) + P(flip all) whenever a joint P exists."""
    _require_pairwise3(F)
    _validate_outcome(x, 3)
    der = derived_tables(F)
    total = R1
    for m in (1, 2, 4):
        total -= der[m].evaluate(x)
    for m in _PAIR_MASKS3:
        total += der[m].evaluate(x)
    return total


# ---------------------------------------------------------------------------
# the general odd-subset conditions

def _odd_masks(n: int, include_full: bool) -> list:
    top = full_mask(n)
    return [A for A in range(1, top + 1)
            if mask_size(A) & 1 and (include_full or A != top)]


def check_theorem2(F: MarginalFamily) -> ClassicalVerdict:
    """For every odd-size subset A and every outcome x, the alternating sum
    sum_{B: A∪B=N, B⊂N} (-1)^{|A∩B|} P_B(x) must lie in [0,1] (the empty
    subset contributing the constant 1 when A is the full set)."""
    _require_equimarginal(F)
    outcomes, grids = _proper_grids(F)
    n = F.n
    top = full_mask(n)
    for A in _odd_masks(n, include_full=True):
        rest = top & ~A
        terms = []
        for S in submasks(A):
            if S == A:
                continue  # B would be the full set
            terms.append((mask_size(S) & 1, rest | S))
        for xi, x in enumerate(outcomes):
            s = R0
            for neg, B in terms:
                v = R1 if B == 0 else grids[B][xi]
                s = s - v if neg else s + v
            if s < R0 or s > R1:
                return ClassicalVerdict(False, Witness("oddsum", A, x, s))
    return ClassicalVerdict(True)


def q_table(F: MarginalFamily) -> list:
    """Q(x) = sum_{B⊂N} (-1)^{n-|B|-1} 2^{-(n-|B|)} P_B(x) for every x,
    indexed by outcome order."""
    _require_equimarginal(F)
    outcomes, grids = _proper_grids(F)
    n = F.n
    const = rat(1, 1 << n) if (n - 1) % 2 == 0 else -rat(1, 1 << n)
    weights = {}
    for B in grids:
        k = n - mask_size(B)
        w = rat(1, 1 << k)
        weights[B] = w if (k - 1) % 2 == 0 else -w
    out = []
    for xi in range(len(outcomes)):
        s = const
        for B, w in weights.items():
            s += w * grids[B][xi]
        out.append(s)
    return out


def q_function(F: MarginalFamily, x) -> object:
    _validate_outcome(x, F.n)
    return q_table(F)[outcome_to_index(x)]


def check_theorem3(F: MarginalFamily) -> ClassicalVerdict:
    """Range condition -2^-n <= Q(x) <= 1 - 2^-n plus the flip conditions
    0 <= Q(x) + Q(flip(A,x)) <= 2 for every odd-size nonempty A."""
    n = F.n
    q = q_table(F)
    outcomes = all_outcomes(n)
    lo = -rat(1, 1 << n)
    hi = R1 + lo
    for xi, x in enumerate(outcomes):
        if q[xi] < lo or q[xi] > hi:
            return ClassicalVerdict(False, Witness("qrange", 0, x, q[xi]))
    two = rat(2)
    for A in _odd_masks(n, include_full=True):
        for xi, x in enumerate(outcomes):
            s = q[xi] + q[outcome_to_index(flip(A, x))]
            if s < R0 or s > two:
                return ClassicalVerdict(False, Witness("qflip", A, x, s))
    return ClassicalVerdict(True)


# ---------------------------------------------------------------------------
# reconstruction

def joint_coefficient_interval(F: MarginalFamily):
    """The closed interval of admissible top coefficients c_N; nonempty
    whenever check_theorem2 passes (raises IncompatibleFamilyError otherwise)."""
    verdict = check_theorem2(F)
    if not verdict.compatible:
        w = verdict.witness
        raise IncompatibleFamilyError(
            f"family is incompatible: odd-subset sum for "
            f"A={indices_from_mask(w.subset)} at x={w.outcome} is {w.value}",
            witness=w)
    n = F.n
    q = q_table(F)
    top = full_mask(n)
    lower, upper = None, None
    for xi, x in enumerate(all_outcomes(n)):
        if sigma_eval(top, x) == 1:
            lo, hi = -q[xi], R1 - q[xi]
        else:
            lo, hi = q[xi] - R1, q[xi]
        lower = lo if lower is None or lo > lower else lower
        upper = hi if upper is None or hi < upper else upper
    if lower > upper:
        raise IncompatibleFamilyError(
            f"empty coefficient interval [{lower}, {upper}] despite the "
            "odd-subset conditions passing")  # unreachable if the theory holds
    return lower, upper


def reconstruct_joint(F: MarginalFamily) -> JointTable:
    """A joint distribution with the family's marginals, built as
    P(x) = Q(x) + c_N sigma_N(x) with c_N the interval midpoint."""
    lower, upper = joint_coefficient_interval(F)
    c_top = (lower + upper) / rat(2)
    n = F.n
    q = q_table(F)
    top = full_mask(n)
    values = {}
    for xi, x in enumerate(all_outcomes(n)):
        values[x] = q[xi] + (c_top if sigma_eval(top, x) == 1 else -c_top)
    return JointTable.make(n, values)
