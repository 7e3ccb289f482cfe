"""Independent feasibility oracle: does a family of subset marginals extend
to a joint distribution?  Encoded as an exact-rational linear system over
the 2^n joint probabilities and decided by phase-one simplex.

Deliberately shares no logic with the inequality conditions in `classical`;
agreement between the two routes is what the test suite certifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rat import R0, R1, rat
from .errors import NumericError, ResourceError
from .classical import (MarginalFamily, all_outcomes, indices_from_mask,
                        mask_size)

MAX_VARS = 6


@dataclass(frozen=True)
class FeasibilitySystem:
    """Equalities `rows` (coefficient tuple, rhs) over `num_vars` variables,
    all constrained nonnegative.  Marginal rows have 0/1 coefficients."""

    num_vars: int
    rows: tuple  # of (tuple of rationals, rational)


@dataclass(frozen=True)
class OracleVerdict:
    feasible: bool
    solution: Optional[tuple] = None  # variable values, outcome-index order


def build_system(F: MarginalFamily) -> FeasibilitySystem:
    """One row per (stored subset, restriction): the joint mass consistent
    with the restriction equals the stored probability; plus total mass 1."""
    n = F.n
    if n > MAX_VARS:
        raise ResourceError(f"n={n} exceeds the oracle cap {MAX_VARS}")
    nv = 1 << n
    outcomes = all_outcomes(n)
    rows = []
    for mask in F.stored_masks():
        table = F.tables[mask]
        idx = [i - 1 for i in indices_from_mask(mask)]
        k = mask_size(mask)
        restriction_index = [
            sum(x[i] << (k - 1 - j) for j, i in enumerate(idx)) for x in outcomes]
        for ri, r in enumerate(all_outcomes(k)):
            coeffs = tuple(R1 if restriction_index[xi] == ri else R0
                           for xi in range(nv))
            rows.append((coeffs, table.values[r]))
    rows.append((tuple(R1 for _ in range(nv)), R1))
    return FeasibilitySystem(nv, tuple(rows))


def _independent_rows(system: FeasibilitySystem):
    """Gaussian elimination over rationals; returns indices of a maximal
    independent subset of the original rows, or None when elimination
    exposes an inconsistency (0 = c with c != 0), i.e. infeasibility."""
    nv = system.num_vars
    work = [list(coeffs) + [rhs] for coeffs, rhs in system.rows]
    orig = list(range(len(work)))
    selected = []
    r = 0
    for col in range(nv):
        piv = None
        for i in range(r, len(work)):
            if work[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        orig[r], orig[piv] = orig[piv], orig[r]
        selected.append(orig[r])
        prow = work[r]
        pval = prow[col]
        for i in range(r + 1, len(work)):
            f = work[i][col]
            if f != 0:
                f = f / pval
                row = work[i]
                # entries left of `col` are already zero in both rows
                work[i] = row[:col] + [a - f * b
                                       for a, b in zip(row[col:], prow[col:])]
        r += 1
        if r == len(work):
            break
    for i in range(r, len(work)):
        if work[i][nv] != 0:
            return None
    return selected


def solve_feasibility(system: FeasibilitySystem) -> OracleVerdict:
    """Exact phase-one simplex under Bland's rule.  Feasible systems yield a
    vertex solution, re-verified against every original row before return."""
    selected = _independent_rows(system)
    if selected is None:
        return OracleVerdict(False)
    nv = system.num_vars
    m = len(selected)
    if m == 0:
        return OracleVerdict(True, tuple(R0 for _ in range(nv)))

    # tableau over structural + artificial columns; artificial basis start
    T = []
    for i, ri in enumerate(selected):
        coeffs, rhs = system.rows[ri]
        row = [-c for c in coeffs] if rhs < 0 else list(coeffs)
        rhs = -rhs if rhs < 0 else rhs
        art = [R0] * m
        art[i] = R1
        T.append(row + art + [rhs])
    width = nv + m
    basis = [nv + i for i in range(m)]
    # reduced costs for minimizing the artificial sum
    z = []
    for j in range(width):
        colsum = R0
        for i in range(m):
            colsum += T[i][j]
        z.append((R1 if j >= nv else R0) - colsum)

    while True:
        enter = -1
        for j in range(width):
            if z[j] < R0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > R0:
                ratio = T[i][width] / a
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise NumericError("phase-one simplex unbounded; malformed system")
        prow = T[leave]
        p = prow[enter]
        if p != R1:
            prow = [v / p for v in prow]
            T[leave] = prow
        for i in range(m):
            if i != leave:
                f = T[i][enter]
                if f != 0:
                    T[i] = [a - f * b for a, b in zip(T[i], prow)]
        f = z[enter]
        if f != 0:
            z = [a - f * b for a, b in zip(z, prow[:width])]
        basis[leave] = enter

    art_value = R0
    for i in range(m):
        if basis[i] >= nv:
            art_value += T[i][width]
    if art_value != 0:
        return OracleVerdict(False)

    x = [R0] * nv
    for i in range(m):
        if basis[i] < nv:
            x[basis[i]] = T[i][width]
    for coeffs, rhs in system.rows:
        total = R0
        for c, v in zip(coeffs, x):
            if c != 0:
                total += c * v
        if total != rhs:
            raise NumericError("simplex solution fails an original equality")
    if any(v < 0 for v in x):
        raise NumericError("simplex solution has a negative entry")
    return OracleVerdict(True, tuple(x))


def oracle_verdict(F: MarginalFamily) -> OracleVerdict:
    """Convenience wrapper: build the system for F and decide it."""
    return solve_feasibility(build_system(F))
