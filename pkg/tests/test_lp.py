"""Feasibility oracle vs. exhaustive vertex enumeration (stdlib Fractions)."""

from fractions import Fraction
from itertools import combinations

import pytest

from margcheck import classical as cl
from margcheck import lp
from margcheck._rat import rat

from conftest import family_of, perturbed_family, random_joint

R = rat
PAIRS3 = (0b011, 0b101, 0b110)


def _as_fraction_rows(system):
    return [[Fraction(str(c)) for c in coeffs] + [Fraction(str(rhs))]
            for coeffs, rhs in system.rows]


def _pivot_rows(mat, ncols):
    """Row indices of a maximal independent subset, plus inconsistency flag."""
    work = [row[:] for row in mat]
    orig = list(range(len(work)))
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        orig[r], orig[piv] = orig[piv], orig[r]
        for i in range(len(work)):
            if i != r and work[i][col] != 0:
                f = work[i][col] / work[r][col]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        r += 1
    bad = any(all(v == 0 for v in row[:ncols]) and row[ncols] != 0
              for row in work[r:])
    return orig[:r], bad


def _solve_square(rows, cols):
    """Solve the restriction of `rows` to `cols`; None when singular."""
    k = len(cols)
    M = [[row[c] for c in cols] + [row[-1]] for row in rows]
    for col in range(k):
        piv = next((i for i in range(col, k) if M[i][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        M[col] = [v / M[col][col] for v in M[col]]
        for i in range(k):
            if i != col and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return [M[i][k] for i in range(k)]


def vertex_oracle(system):
    """Feasible iff some basic solution is nonnegative.

    The region lies inside the probability simplex, so it is bounded and
    pointed; nonemptiness is equivalent to a nonnegative basic solution.
    """
    nv = system.num_vars
    mat = _as_fraction_rows(system)
    piv, inconsistent = _pivot_rows(mat, nv)
    if inconsistent:
        return False
    base = [mat[i] for i in piv]
    rank = len(piv)
    if rank == 0:
        return all(row[nv] == 0 for row in mat)
    for cols in combinations(range(nv), rank):
        x = _solve_square(base, cols)
        if x is None:
            continue
        full = [Fraction(0)] * nv
        for c, v in zip(cols, x):
            full[c] = v
        if any(v < 0 for v in full):
            continue
        if all(sum(c * v for c, v in zip(row[:nv], full)) == row[nv]
               for row in mat):
            return True
    return False


def anti_family():
    tab = {(0, 0): R(0), (0, 1): R(1, 2), (1, 0): R(1, 2), (1, 1): R(0)}
    return cl.MarginalFamily.make(
        3, [cl.MarginalTable.make(3, m, tab) for m in PAIRS3])


def test_system_shape():
    F = family_of(random_joint(3, __import__("random").Random(7)))
    S = lp.build_system(F)
    assert S.num_vars == 8
    assert len(S.rows) == 3 * 4 + 1
    coeffs, rhs = S.rows[-1]
    assert rhs == R(1) and all(c == R(1) for c in coeffs)
    # marginal rows are 0/1 indicators selecting matching outcomes
    row, value = S.rows[0]
    assert set(row) <= {R(0), R(1)}
    assert sum(1 for c in row if c == R(1)) == 2


def test_known_instances():
    rngmod = __import__("random").Random(11)
    assert lp.oracle_verdict(family_of(random_joint(3, rngmod))).feasible
    v = lp.oracle_verdict(anti_family())
    assert not v.feasible and v.solution is None


def test_solution_is_a_valid_joint(rng):
    found = 0
    for _ in range(30):
        F = perturbed_family(3, rng)
        v = lp.oracle_verdict(F)
        if not v.feasible:
            continue
        found += 1
        assert all(x >= 0 for x in v.solution)
        assert sum(v.solution, R(0)) == R(1)
        J = cl.JointTable.make(3, {x: v.solution[cl.outcome_to_index(x)]
                                   for x in cl.all_outcomes(3)})
        for m in F.stored_masks():
            assert cl.marginalize(J, m).values == F.tables[m].values
    assert found > 10


def test_solution_is_basic(rng):
    # a vertex has at most rank-many nonzero coordinates
    for _ in range(10):
        F = perturbed_family(3, rng)
        v = lp.oracle_verdict(F)
        if not v.feasible:
            continue
        S = lp.build_system(F)
        piv, bad = _pivot_rows(_as_fraction_rows(S), S.num_vars)
        assert not bad
        assert sum(1 for x in v.solution if x != 0) <= len(piv)


def test_vertex_enumeration_agreement(rng):
    outcomes = {True: 0, False: 0}
    for n, reps in ((2, 25), (3, 60), (4, 12)):
        for _ in range(reps):
            F = perturbed_family(n, rng)
            S = lp.build_system(F)
            got = lp.solve_feasibility(S).feasible
            want = vertex_oracle(S)
            assert got == want, (n, got, want)
            outcomes[got] += 1
    assert outcomes[True] > 20 and outcomes[False] > 10


def test_vertex_enumeration_agreement_pairwise_n4(rng):
    # all six pair marginals rather than the four maximal triples
    pair_masks = [m for m in range(1, 16) if cl.mask_size(m) == 2]
    hits = {True: 0, False: 0}
    for _ in range(8):
        F = perturbed_family(4, rng)
        der = cl.derived_tables(F)
        FP = cl.MarginalFamily.make(4, [der[m] for m in pair_masks])
        S = lp.build_system(FP)
        got = lp.solve_feasibility(S).feasible
        assert got == vertex_oracle(S)
        hits[got] += 1
    assert sum(hits.values()) == 8


def test_matches_inequality_route(rng):
    for n in (2, 3, 4, 5):
        for _ in range(25):
            F = perturbed_family(n, rng)
            assert lp.oracle_verdict(F).feasible == cl.check_theorem2(F).compatible


def test_inconsistent_system_short_circuits():
    # equimarginality violations surface as linear inconsistency, not simplex work
    tab_a = {(0, 0): R(3, 4), (0, 1): R(0), (1, 0): R(0), (1, 1): R(1, 4)}
    tab_b = {(0, 0): R(1, 4), (0, 1): R(1, 4), (1, 0): R(1, 4), (1, 1): R(1, 4)}
    F = cl.MarginalFamily.make(3, [
        cl.MarginalTable.make(3, 0b011, tab_a),
        cl.MarginalTable.make(3, 0b101, tab_b),
        cl.MarginalTable.make(3, 0b110, tab_b),
    ])
    S = lp.build_system(F)
    assert lp._independent_rows(S) is None
    assert not lp.solve_feasibility(S).feasible
    assert not vertex_oracle(S)


def test_degenerate_vertex():
    # GHZ marginals force six of eight coordinates to zero
    vals = {x: (R(1, 2) if x in ((0, 0, 0), (1, 1, 1)) else R(0))
            for x in cl.all_outcomes(3)}
    F = family_of(cl.JointTable.make(3, vals))
    v = lp.oracle_verdict(F)
    assert v.feasible
    assert v.solution[0] == R(1, 2) and v.solution[7] == R(1, 2)
    assert all(v.solution[i] == 0 for i in range(1, 7))
