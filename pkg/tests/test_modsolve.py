import random
from math import gcd

import numpy as np
import pytest

from conicbundle.conic import FibreConic, parameterize
from conicbundle.modsolve import (
    class_lattice_basis,
    divisor_solutions,
    iter_lattice_points,
    lagrange_reduce,
    lattice_points_in_box,
    solutions_mod_prime_power,
)
from conicbundle.numth import euler_phi, factor


def _scan_classes(coeffs, m, p):
    """Independent projective scan: group primitive pairs into unit classes."""
    C = FibreConic(*coeffs)
    hits = set()
    for u in range(m):
        for v in range(m):
            if u % p == 0 and v % p == 0:
                continue
            x, y, z = parameterize(C, u, v)
            if x % m or y % m or z % m:
                continue
            hits.add((u, v))
    # count classes: orbit size of unit scaling is phi(m)
    assert len(hits) % euler_phi(m) == 0 or not hits
    return len(hits) // euler_phi(m) if hits else 0


CONICS = [
    (1, 5, 2, 2, -1),    # det -41
    (1, 0, 0, -1, 0),    # x^2 - yz, det 1
    (1, 2, 1, 1, 0),     # det -1
    (2, 6, 1, 3, 1),     # composite det
    (3, 12, 5, 10, 2),
]


@pytest.mark.parametrize("coeffs", CONICS)
@pytest.mark.parametrize("p,k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (41, 1)])
def test_solutions_mod_prime_power_vs_pair_scan(coeffs, p, k):
    m = p**k
    got = solutions_mod_prime_power(coeffs, p, k)
    # representatives must be valid, distinct classes
    C = FibreConic(*coeffs)
    seen = set()
    for (u, v) in got:
        x, y, z = parameterize(C, u, v)
        assert x % m == 0 and y % m == 0 and z % m == 0
        assert not (u % p == 0 and v % p == 0)
        # canonical chart form: (1, t) or (p*j, 1)
        assert (u == 1) or (v == 1 and u % p == 0)
        assert (u, v) not in seen
        seen.add((u, v))
    if m <= 125:
        assert len(got) == _scan_classes(coeffs, m, p)


def test_solutions_lifting_path_matches_scan_route():
    # force the lifting route by comparing against small-power scans composed
    coeffs = (1, 5, 2, 2, -1)
    for p, k in [(41, 1)]:
        got = solutions_mod_prime_power(coeffs, p, k)
        assert len(got) == _scan_classes(coeffs, p**k, p)


def test_divisor_solutions_covers_divisors():
    coeffs = (1, 5, 2, 2, -1)
    C = FibreConic(*coeffs)
    fd = factor(abs(C.pi_det))
    table = dict(divisor_solutions(coeffs, fd))
    for g, classes in table.items():
        assert g > 1 and abs(C.pi_det) % g == 0
        for (u, v) in classes:
            x, y, z = parameterize(C, u, v)
            assert x % g == 0 and y % g == 0 and z % g == 0


def test_lagrange_reduce_preserves_lattice_and_shortens():
    rng = random.Random(5)
    for _ in range(100):
        b1 = (rng.randint(-9, 9), rng.randint(-9, 9))
        b2 = (rng.randint(-9, 9), rng.randint(-9, 9))
        det = b1[0] * b2[1] - b1[1] * b2[0]
        if det == 0:
            continue
        r1, r2 = lagrange_reduce(b1, b2)
        rdet = r1[0] * r2[1] - r1[1] * r2[0]
        assert abs(rdet) == abs(det)
        # reduction never lengthens the basis in the euclidean sense (the
        # sup norm of an entry may grow by up to sqrt(2), so don't test it)
        sq = lambda v: v[0] * v[0] + v[1] * v[1]
        assert sq(r1) <= sq(r2)
        assert max(sq(r1), sq(r2)) <= max(sq(b1), sq(b2))
        # first vector is a shortest nonzero lattice vector: no small
        # integer combination beats it
        best = min(
            sq((c1 * r1[0] + c2 * r2[0], c1 * r1[1] + c2 * r2[1]))
            for c1 in range(-3, 4)
            for c2 in range(-3, 4)
            if (c1, c2) != (0, 0)
        )
        assert sq(r1) == best


def test_class_lattice_basis_membership():
    for sigma, tau, g in [(1, 3, 25), (1, 0, 9), (2, 1, 8), (0, 1, 7)]:
        b1, b2 = class_lattice_basis(sigma, tau, g)
        for c1 in range(-3, 4):
            for c2 in range(-3, 4):
                u = c1 * b1[0] + c2 * b2[0]
                v = c1 * b1[1] + c2 * b2[1]
                assert (tau * u - sigma * v) % g == 0


def test_lattice_points_in_box_vs_brute():
    rng = random.Random(23)
    done = 0
    while done < 40:
        b1 = (rng.randint(-5, 5), rng.randint(-5, 5))
        b2 = (rng.randint(-5, 5), rng.randint(-5, 5))
        det = b1[0] * b2[1] - b1[1] * b2[0]
        if det == 0:
            continue
        done += 1
        U = rng.randint(1, 25)
        u, v = lattice_points_in_box(b1, b2, U)
        got = set(zip(u.tolist(), v.tolist()))
        # Cramer bound: |c1| = |x*b2[1]-y*b2[0]|/|det| <= 2U*max|b2|/|det|
        m1 = 2 * U * max(abs(b2[0]), abs(b2[1])) // abs(det) + 1
        m2 = 2 * U * max(abs(b1[0]), abs(b1[1])) // abs(det) + 1
        brute = set()
        for c1 in range(-m1, m1 + 1):
            x0, y0 = c1 * b1[0], c1 * b1[1]
            for c2 in range(-m2, m2 + 1):
                x = x0 + c2 * b2[0]
                y = y0 + c2 * b2[1]
                if abs(x) <= U and abs(y) <= U:
                    brute.add((x, y))
        assert got == brute
        assert len(got) == len(u)


def test_iter_lattice_points_matches_bulk():
    b1, b2 = (3, 1), (-1, 2)
    U = 40
    u, v = lattice_points_in_box(b1, b2, U)
    bulk = set(zip(u.tolist(), v.tolist()))
    streamed = set()
    for cu, cv in iter_lattice_points(b1, b2, U, chunk=64):
        streamed.update(zip(cu.tolist(), cv.tolist()))
    assert streamed == bulk
