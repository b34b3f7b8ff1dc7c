"""Projective congruence solving and planar lattice enumeration.

Engine for the layered conic count: find every class (sigma : tau) on the
projective line over Z/g with all three parameterization quadratics zero,
turn each class into the index-g sublattice {(u,v) : tau*u - sigma*v = 0
mod g}, and stream the lattice points inside a sup-norm box.
"""
from __future__ import annotations

import itertools
from math import gcd

import numpy as np

from .numth import FactoredInteger, find_roots_mod_p

_SCAN_BOUND = 10**6
_COMBO_CAP = 10_000


def _quad_triple_mod(coeffs, m):
    cxx, cxy, cxz, cyz, czz = (c % m for c in coeffs)
    return cxx, cxy, cxz, cyz, czz


def _scan_chart_solutions(coeffs, m: int, p: int) -> list[tuple[int, int]]:
    """All of P^1(Z/m) with the three quadratics zero, m = p^k <= scan bound."""
    cxx, cxy, cxz, cyz, czz = _quad_triple_mod(coeffs, m)
    sols: list[tuple[int, int]] = []
    # chart (1, t)
    t = np.arange(m, dtype=np.int64)
    tt = (t * t) % m
    q1 = (cxy + cyz * t) % m
    q2 = (cxx + cxz * t + czz * tt) % m
    q3 = (cxy * t + cyz * tt) % m
    for tv in t[(q1 == 0) & (q2 == 0) & (q3 == 0)]:
        sols.append((1, int(tv)))
    # chart (p*j, 1)
    j = np.arange(m // p, dtype=np.int64)
    u = (p * j) % m
    uu = (u * u) % m
    q1 = (cxy * uu + cyz * u) % m
    q2 = (cxx * uu + cxz * u + czz) % m
    q3 = (cxy * u + cyz) % m
    for uv in u[(q1 == 0) & (q2 == 0) & (q3 == 0)]:
        sols.append((int(uv), 1))
    return sols


def _prime_solutions_algebraic(coeffs, p: int) -> list[tuple[int, int]]:
    """Solutions mod a large prime via gcds of the dehomogenized quadratics."""
    from .zpoly import gf_from_z, gf_gcd, deg

    cxx, cxy, cxz, cyz, czz = _quad_triple_mod(coeffs, p)
    polys = [
        gf_from_z((cxy, cyz), p),        # q1(1, t)
        gf_from_z((cxx, cxz, czz), p),   # -q2(1, t)
        gf_from_z((0, cxy, cyz), p),     # q3(1, t)
    ]
    nonzero = [q for q in polys if q]
    if not nonzero:
        # conic vanishes identically mod p: every class solves
        return [(1, t) for t in range(p)] + [(0, 1)]
    g = nonzero[0]
    for q in nonzero[1:]:
        g = gf_gcd(g, q, p)
    if deg(g) == 0:
        roots = []
    else:
        roots = find_roots_mod_p(g, p)
    sols = [(1, int(r)) for r in sorted(roots)]
    # lone second-chart class (0 : 1)
    if cyz % p == 0 and czz % p == 0:
        sols.append((0, 1))
    return sols


def _lift_solutions(coeffs, p: int, from_k: int, to_k: int, base: list[tuple[int, int]]):
    """Chart-preserving lift of solution classes from mod p^from_k to mod p^to_k."""
    sols = base
    mod_prev = p**from_k
    for k in range(from_k + 1, to_k + 1):
        m = p**k
        cxx, cxy, cxz, cyz, czz = _quad_triple_mod(coeffs, m)
        nxt: list[tuple[int, int]] = []
        use_numpy = m < 2**31
        c = np.arange(p, dtype=np.int64) if use_numpy else range(p)
        for (a, b) in sols:
            if a == 1:
                # lift (1, t): t' = t + mod_prev * c
                if use_numpy:
                    t = (b + mod_prev * c) % m
                    tt = (t * t) % m
                    ok = ((cxy + cyz * t) % m == 0)
                    ok &= ((cxx + cxz * t + czz * tt) % m == 0)
                    ok &= ((cxy * t + cyz * tt) % m == 0)
                    nxt.extend((1, int(tv)) for tv in t[ok])
                else:
                    for ci in c:
                        t = (b + mod_prev * ci) % m
                        tt = t * t % m
                        if (cxy + cyz * t) % m or (cxx + cxz * t + czz * tt) % m:
                            continue
                        if (cxy * t + cyz * tt) % m == 0:
                            nxt.append((1, t))
            else:
                # lift (u, 1) with p | u: u' = u + mod_prev * c
                if use_numpy:
                    u = (a + mod_prev * c) % m
                    uu = (u * u) % m
                    ok = ((cxy * uu + cyz * u) % m == 0)
                    ok &= ((cxx * uu + cxz * u + czz) % m == 0)
                    ok &= ((cxy * u + cyz) % m == 0)
                    nxt.extend((int(uv), 1) for uv in u[ok])
                else:
                    for ci in c:
                        u = (a + mod_prev * ci) % m
                        uu = u * u % m
                        if (cxy * uu + cyz * u) % m or (cxx * uu + cxz * u + czz) % m:
                            continue
                        if (cxy * u + cyz) % m == 0:
                            nxt.append((u, 1))
        sols = nxt
        mod_prev = m
        if not sols:
            break
    return sols


def solutions_mod_prime_power(coeffs, p: int, k: int) -> list[tuple[int, int]]:
    """Classes (sigma : tau) in P^1(Z/p^k) where all three quadratics vanish.

    Representatives are (1, t) or (u, 1) with p | u.  Exhaustive chart scan up
    to the scan bound, then one-digit-at-a-time lifting (each lift candidate
    is checked directly, so the result is exact whether or not roots are
    simple).
    """
    m = p**k
    if m <= _SCAN_BOUND:
        return _scan_chart_solutions(coeffs, m, p)
    if p > _SCAN_BOUND:
        base = _prime_solutions_algebraic(coeffs, p)
        j0 = 1
    else:
        j0 = 1
        while p ** (j0 + 1) <= _SCAN_BOUND:
            j0 += 1
        base = _scan_chart_solutions(coeffs, p**j0, p)
    if k == j0:
        return base
    return _lift_solutions(coeffs, p, j0, k, base)


def _crt_combine(parts) -> list[tuple[int, int]]:
    """Combine per-modulus class lists [(modulus, classes)] into classes mod the product."""
    moduli = [m for m, _ in parts]
    lists = [s for _, s in parts]
    m = 1
    for mi in moduli:
        m *= mi
    total = 1
    for s in lists:
        total *= len(s)
    if total > _COMBO_CAP:
        raise ArithmeticError(f"solution class explosion: {total} CRT combinations")
    # CRT basis: e_i = 1 mod m_i, 0 mod m_j
    basis = []
    for mi in moduli:
        rest = m // mi
        basis.append(rest * pow(rest, -1, mi) % m)
    out = []
    for combo in itertools.product(*lists):
        sig = sum(e * c[0] for e, c in zip(basis, combo)) % m
        tau = sum(e * c[1] for e, c in zip(basis, combo)) % m
        out.append((sig, tau))
    return out


def solutions_mod(coeffs, g: FactoredInteger) -> list[tuple[int, int]]:
    """Solution classes modulo a factored positive integer, combined by CRT."""
    m = abs(g.value)
    if m == 1:
        return [(1, 0)]
    parts = []
    for p, k in g.factors:
        s = solutions_mod_prime_power(coeffs, p, k)
        if not s:
            return []
        parts.append((p**k, s))
    return _crt_combine(parts)


def divisor_solutions(coeffs, fd: FactoredInteger):
    """Yield (g, classes) for every divisor g > 1 of |fd.value|.

    Prime-power solving is done once per (p, k) and shared across divisors;
    divisors whose class list is empty are skipped.
    """
    per: list[tuple[int, dict[int, list]]] = []
    for p, k in fd.factors:
        table = {}
        for j in range(1, k + 1):
            table[j] = solutions_mod_prime_power(coeffs, p, j)
            if not table[j]:
                # higher powers can only lose solutions
                break
        per.append((p, table))

    def rec(i, g, parts):
        if i == len(per):
            if g > 1:
                yield g, _crt_combine(parts) if len(parts) > 1 else list(parts[0][1])
            return
        p, table = per[i]
        yield from rec(i + 1, g, parts)
        for j, sols in table.items():
            if not sols:
                break
            yield from rec(i + 1, g * p**j, parts + [(p**j, sols)])

    yield from rec(0, 1, [])


def lagrange_reduce(b1, b2):
    """Gauss-reduce a 2-D lattice basis (shortest vector first)."""
    v1 = list(b1)
    v2 = list(b2)
    n1 = v1[0] * v1[0] + v1[1] * v1[1]
    n2 = v2[0] * v2[0] + v2[1] * v2[1]
    if n1 > n2:
        v1, v2 = v2, v1
        n1, n2 = n2, n1
    while True:
        d = v1[0] * v2[0] + v1[1] * v2[1]
        # nearest integer to d / n1
        mu = (2 * d + n1) // (2 * n1) if d >= 0 else -((2 * (-d) + n1) // (2 * n1))
        if mu:
            v2 = [v2[0] - mu * v1[0], v2[1] - mu * v1[1]]
        n2 = v2[0] * v2[0] + v2[1] * v2[1]
        if n2 >= n1:
            return (v1[0], v1[1]), (v2[0], v2[1])
        v1, v2 = v2, v1
        n1, n2 = n2, n1


def class_lattice_basis(sigma: int, tau: int, g: int):
    """Reduced basis of {(u,v) : tau*u - sigma*v = 0 mod g} for a primitive class."""
    sigma %= g
    tau %= g
    d = gcd(tau, g)
    gp = g // d
    if gp == 1:
        b1, b2 = (1, 0), (0, d)
    else:
        taup = (tau // d) % gp
        u0 = sigma * pow(taup, -1, gp) % gp
        b1, b2 = (gp, 0), (u0, d)
    return lagrange_reduce(b1, b2)


def _multi_arange(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    rep = np.repeat(np.arange(len(counts)), counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(
        np.cumsum(counts) - counts, counts
    )
    return starts[rep] + offsets


def _n1_bounds(base: np.ndarray, c: int, U: int):
    """Integer interval of n with |base + n*c| <= U (c != 0)."""
    if c > 0:
        lo = -((U + base) // c)          # ceil((-U - base)/c)
        hi = (U - base) // c
    else:
        lo = -((U - base) // (-c))       # ceil((U - base)/c), c < 0 flips
        hi = (U + base) // (-c)
    return lo, hi


def _row_ranges(b1, b2, U: int):
    """Per-n2 interval of n1 with n1*b1 + n2*b2 inside the sup-norm-U box."""
    b1u, b1v = b1
    b2u, b2v = b2
    det = b1u * b2v - b1v * b2u
    assert det != 0
    n2_cap = (U * (abs(b1u) + abs(b1v))) // abs(det) + 1
    n2 = np.arange(-n2_cap, n2_cap + 1, dtype=np.int64)
    lo = np.full(len(n2), -(2**62), dtype=np.int64)
    hi = np.full(len(n2), 2**62, dtype=np.int64)
    for base, c in ((n2 * b2u, b1u), (n2 * b2v, b1v)):
        if c != 0:
            l, h = _n1_bounds(base, c, U)
            np.maximum(lo, l, out=lo)
            np.minimum(hi, h, out=hi)
        else:
            bad = np.abs(base) > U
            lo[bad] = 1
            hi[bad] = 0
    counts = np.maximum(hi - lo + 1, 0)
    return n2, lo, counts


def _emit_rows(b1, b2, n2, lo, counts):
    n1 = _multi_arange(lo, counts)
    n2_rep = np.repeat(n2, counts)
    u = n1 * b1[0] + n2_rep * b2[0]
    v = n1 * b1[1] + n2_rep * b2[1]
    return u, v


def lattice_points_in_box(b1, b2, U: int):
    """All lattice points n1*b1 + n2*b2 with sup norm <= U, as int64 arrays."""
    n2, lo, counts = _row_ranges(b1, b2, U)
    return _emit_rows(b1, b2, n2, lo, counts)


def iter_lattice_points(b1, b2, U: int, chunk: int = 4_000_000):
    """Yield the box's lattice points in (u, v) array chunks of bounded size."""
    n2, lo, counts = _row_ranges(b1, b2, U)
    total = int(counts.sum())
    if total <= chunk:
        yield _emit_rows(b1, b2, n2, lo, counts)
        return
    cum = np.cumsum(counts)
    start = 0
    while start < len(n2):
        base = cum[start - 1] if start else 0
        stop = int(np.searchsorted(cum, base + chunk, side="right")) + 1
        stop = max(stop, start + 1)
        sl = slice(start, stop)
        yield _emit_rows(b1, b2, n2[sl], lo[sl], counts[sl])
        start = stop
