"""Shared generators and fixture helpers."""

import json
import os
import random

import numpy as np
import pytest

from margcheck import classical as cl
from margcheck._rat import rat

R = rat

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def load_fixture(name):
    with open(fixture_path(name)) as fh:
        return json.load(fh)


def maximal_masks(n):
    top = cl.full_mask(n)
    return [top & ~(1 << i) for i in range(n)]


def random_joint(n, rng, denom_pow=6):
    """Random exact-rational distribution on n bits."""
    d = 1 << denom_pow
    raw = [rng.randrange(0, d + 1) for _ in range(1 << n)]
    s = sum(raw)
    if s == 0:
        raw[0] = 1
        s = 1
    vals = {x: R(raw[i]) / s for i, x in enumerate(cl.all_outcomes(n))}
    return cl.JointTable.make(n, vals)


def family_of(P, masks=None):
    masks = maximal_masks(P.n) if masks is None else masks
    return cl.MarginalFamily.make(P.n, [cl.marginalize(P, m) for m in masks])


def _damped_family(n, coeffs, orig, changed, masks):
    # halve the perturbation until every stored table is a valid distribution
    for _ in range(12):
        try:
            return cl.family_from_coefficients(cl.SigmaCoefficients(n, coeffs), masks)
        except cl.InputError:
            for t in changed:
                coeffs[t] = (coeffs[t] + orig[t]) / R(2)
    for t in changed:
        coeffs[t] = orig[t]
    return cl.family_from_coefficients(cl.SigmaCoefficients(n, coeffs), masks)


def perturbed_family(n, rng):
    """Equimarginal family near a random joint.

    Three modes: untouched marginals of the joint (always compatible), a few
    nudged correlation coefficients (borderline), and a frustrated triple of
    mutually anticorrelated pairs (often incompatible for n >= 3).  Tables
    always remain valid distributions; compatibility is the open question.
    """
    P = random_joint(n, rng)
    C = cl.coefficients_from_joint(P)
    coeffs = dict(C.coeffs)
    top = cl.full_mask(n)
    masks = maximal_masks(n)
    roll = rng.random()
    if roll < 0.3:
        return family_of(P, masks)
    if roll < 0.65 or n < 3:
        pool = list(range(1, top))
        k = rng.randrange(1, min(4, len(pool) + 1))
        targets = rng.sample(pool, k)
        scale = R(1, 1 << n)
        for t in targets:
            coeffs[t] = coeffs[t] + scale * R(rng.randrange(-8, 9), 8)
        return _damped_family(n, coeffs, C.coeffs, targets, masks)
    # anticorrelate the pairs of a random triple and mute its singles; an
    # incompatible triple sub-family rules out any joint for the whole family
    i, j, k = rng.sample(range(n), 3)
    strength = R(rng.randrange(4, 11), 10)
    blend = R(rng.randrange(6, 11), 10)
    unit = R(1, 1 << n)
    changed = []
    for a, b in ((i, j), (i, k), (j, k)):
        m = (1 << a) | (1 << b)
        coeffs[m] = (R(1) - blend) * coeffs[m] - blend * strength * unit
        changed.append(m)
    for a in (i, j, k):
        m = 1 << a
        coeffs[m] = (R(1) - blend) * coeffs[m]
        changed.append(m)
    return _damped_family(n, coeffs, C.coeffs, changed, masks)


def random_hermitian(dim, rng_np):
    G = rng_np.normal(size=(dim, dim)) + 1j * rng_np.normal(size=(dim, dim))
    return (G + G.conj().T) / 2


def all_reductions(rho, n):
    """Every proper nonempty reduction, keyed by subset bitmask."""
    from margcheck import qlinalg as ql

    out = {}
    for mask in range(1, (1 << n) - 1):
        keep = [i + 1 for i in range(n) if mask >> i & 1]
        out[mask] = ql.partial_trace(rho, keep, n)
    return out


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def np_rng():
    return np.random.default_rng(np.random.Philox(key=20240817))
