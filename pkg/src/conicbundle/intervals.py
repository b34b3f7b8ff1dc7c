"""Exact interval arithmetic on integer-scaled dyadic boxes.

Coordinates live on a grid u = U / 2^S for integers U, so quadratic values
scale by 4^S and every bound below is an exact integer statement.  Used by
the conic enumeration certificate (a positive floor for the parameterized
height on the unit box boundary) and by the archimedean volume quadrature.
"""
from __future__ import annotations

Interval = tuple[int, int]  # (lo, hi), lo <= hi


def iv_mul(a: Interval, b: Interval) -> Interval:
    p1 = a[0] * b[0]
    p2 = a[0] * b[1]
    p3 = a[1] * b[0]
    p4 = a[1] * b[1]
    return min(p1, p2, p3, p4), max(p1, p2, p3, p4)


def iv_square(a: Interval) -> Interval:
    lo, hi = a
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return 0, max(lo * lo, hi * hi)


def iv_add(a: Interval, b: Interval) -> Interval:
    return a[0] + b[0], a[1] + b[1]


def iv_scale(k: int, a: Interval) -> Interval:
    if k >= 0:
        return k * a[0], k * a[1]
    return k * a[1], k * a[0]


def iv_mig(a: Interval) -> int:
    """Exact lower bound for |x| over the interval."""
    lo, hi = a
    if lo <= 0 <= hi:
        return 0
    return min(abs(lo), abs(hi))


def iv_mag(a: Interval) -> int:
    """Exact upper bound for |x| over the interval."""
    return max(abs(a[0]), abs(a[1]))


def quad_range(A: int, B: int, C: int, u: Interval, v: Interval) -> Interval:
    """Range bound for A*u^2 + B*u*v + C*v^2 over the box u x v (scaled ints)."""
    out = (0, 0)
    if A:
        out = iv_add(out, iv_scale(A, iv_square(u)))
    if B:
        out = iv_add(out, iv_scale(B, iv_mul(u, v)))
    if C:
        out = iv_add(out, iv_scale(C, iv_square(v)))
    return out


class ParamIntervals:
    """Interval evaluator for the three parameterization quadratics of a conic.

    For conic coefficients (cxx, cxy, cxz, cyz, czz) the components are
        x(u,v) = cxy u^2 + cyz uv
        y(u,v) = -cxx u^2 - cxz uv - czz v^2
        z(u,v) = cxy uv + cyz v^2
    and the weighted sup norm is max(|x|, weight*|y|, |z|).
    """

    __slots__ = ("cxx", "cxy", "cxz", "cyz", "czz", "weight")

    def __init__(self, cxx: int, cxy: int, cxz: int, cyz: int, czz: int, weight: int):
        self.cxx = cxx
        self.cxy = cxy
        self.cxz = cxz
        self.cyz = cyz
        self.czz = czz
        self.weight = weight

    def component_ranges(self, u: Interval, v: Interval):
        x = quad_range(self.cxy, self.cyz, 0, u, v)
        y = quad_range(-self.cxx, -self.cxz, -self.czz, u, v)
        z = quad_range(0, self.cxy, self.cyz, u, v)
        return x, y, z

    def norm_lower(self, u: Interval, v: Interval) -> int:
        """Certified lower bound of the weighted sup norm on the box (scaled)."""
        x, y, z = self.component_ranges(u, v)
        return max(iv_mig(x), self.weight * iv_mig(y), iv_mig(z))

    def norm_upper(self, u: Interval, v: Interval) -> int:
        x, y, z = self.component_ranges(u, v)
        return max(iv_mag(x), self.weight * iv_mag(y), iv_mag(z))

    def norm_at(self, U: int, V: int) -> int:
        """Exact weighted sup norm at a scaled grid point."""
        x = self.cxy * U * U + self.cyz * U * V
        y = -self.cxx * U * U - self.cxz * U * V - self.czz * V * V
        z = self.cxy * U * V + self.cyz * V * V
        return max(abs(x), self.weight * abs(y), abs(z))
