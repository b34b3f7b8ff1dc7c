"""Multiplicative-function sums over primes and squarefree integers.

The engine room for the growth-exponent experiments: distinct-root counts
of binary forms modulo p in bulk, the degeneracy count for the fibration
discriminant, partial sums of multiplicative functions with exponent
fitting, and the height-weighted lattice sums.

Sums that a float cannot certify are accumulated in 96-bit fixed point
(every term rounded down), so the returned rational is a lower bound with
error below terms * 2^-96; small arguments get exact Fraction summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .forms import BinaryForm, factor_over_q, resultant
from .numth import MultiplicativeFn, factor, find_roots_mod_p, primes_up_to
from .surface import CubicSurfaceNF
from .zpoly import gf_gcd, gf_pow_xp_mod, trim

_FIX_BITS = 96
_SCAN_CUT = 1000  # below this, counting roots by direct scan beats Frobenius


class _FixedSum:
    """Sum of nonnegative rationals, each floored at 96 fractional bits."""

    __slots__ = ("acc", "terms")

    def __init__(self):
        self.acc = 0
        self.terms = 0

    def add(self, num: int, den: int):
        self.acc += (num << _FIX_BITS) // den
        self.terms += 1

    def lower(self) -> Fraction:
        return Fraction(self.acc, 1 << _FIX_BITS)

    def upper(self) -> Fraction:
        return Fraction(self.acc + self.terms, 1 << _FIX_BITS)


# --------------------------------------------------------------------------
# shared sieves (built once, grown on demand, read-only to callers)

_prime_cache = {"limit": 0, "primes": np.empty(0, dtype=np.int64)}
_spf_cache = {"limit": 0, "table": None}


def shared_primes(limit: int) -> np.ndarray:
    """All primes <= limit, from a cached sieve that only ever grows."""
    if limit > _prime_cache["limit"]:
        _prime_cache["primes"] = primes_up_to(limit).astype(np.int64)
        _prime_cache["limit"] = limit
    ps = _prime_cache["primes"]
    return ps[: int(np.searchsorted(ps, limit, side="right"))]


def _smallest_factor_table(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n (0 for n < 2)."""
    if _spf_cache["limit"] >= limit:
        return _spf_cache["table"]
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.arange(limit + 1, dtype=np.int32)
    spf[spf == 0] = rest[spf == 0]
    spf[:2] = 0
    _spf_cache["table"] = spf
    _spf_cache["limit"] = limit
    return spf


# --------------------------------------------------------------------------
# distinct projective roots of binary forms mod p


def projective_roots_mod_p(form: BinaryForm, p: int) -> int:
    """Number of classes (s:t) mod p killing the form (p+1 when p divides it)."""
    dehom = tuple(c % p for c in form.dehomogenized())
    if not any(dehom) and form.coeffs[0] % p == 0:
        return p + 1
    n = len(find_roots_mod_p(list(form.dehomogenized()), p))
    return n + (1 if form.coeffs[0] % p == 0 else 0)


def _frobenius_root_count(dehom_asc: tuple[int, ...], p: int) -> int:
    # distinct roots of a squarefree-or-not polynomial mod p via gcd(x^p - x, f)
    f = trim(tuple(c % p for c in dehom_asc))
    if not f:
        return p
    if len(f) == 1:
        return 0
    if len(f) == 2:
        return 1
    if p <= _SCAN_CUT:
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(f):
            acc = (acc * xs + c) % p
        return int(np.count_nonzero(acc == 0))
    xp = gf_pow_xp_mod(f, p)
    g = list(xp) + [0] * max(0, 2 - len(xp))
    g[1] = (g[1] - 1) % p
    return len(gf_gcd(tuple(g), f, p)) - 1


def projective_root_counts(form: BinaryForm, ps: np.ndarray) -> np.ndarray:
    """Vector of projective root counts mod p over the given primes.

    Degree-1 forms and quadratics get closed forms (the quadratic case is a
    single Legendre symbol per prime); everything else runs the Frobenius
    gcd prime by prime.
    """
    if form.is_zero():
        raise ValueError("zero form has no root count")
    out = np.empty(len(ps), dtype=np.int64)
    c, prim = form.primitive()
    coeffs = prim.coeffs
    if prim.degree == 1:
        out[:] = 1
    elif prim.degree == 2:
        c0, c1, c2 = coeffs
        disc = c1 * c1 - 4 * c0 * c2
        for i, p in enumerate(ps.tolist()):
            if p == 2:
                out[i] = projective_roots_mod_p(prim, 2)
                continue
            sym = pow(disc % p, (p - 1) >> 1, p)
            # 0, 1, p-1 -> one root, two roots, none (projectively complete)
            out[i] = 1 if sym == 0 else (2 if sym == 1 else 0)
    else:
        dehom = prim.dehomogenized()
        lead = coeffs[0]
        for i, p in enumerate(ps.tolist()):
            out[i] = _frobenius_root_count(dehom, p) + (1 if lead % p == 0 else 0)
    # primes dividing the content kill every class
    for q, _ in factor(c).factors:
        hit = np.searchsorted(ps, q)
        if hit < len(ps) and ps[hit] == q:
            out[hit] = ps[hit] + 1
    return out


# --------------------------------------------------------------------------
# discriminant factor bookkeeping


@dataclass(frozen=True)
class DeltaFactorData:
    """Irreducible factors of the fibration discriminant and their invariants.

    w_f multiplies together everything whose primes can break the per-factor
    root-count decomposition: the content, the base resultant invariant, all
    pairwise factor resultants, and the leading values a_i.
    """

    delta_i: tuple[BinaryForm, ...]
    a_i: tuple[int, ...]
    content: int
    w0: int
    w_f: int
    extra_primes: tuple[int, ...]  # divide w_f but not w0


def delta_factor_data(X: CubicSurfaceNF) -> DeltaFactorData:
    fac = X.factorization
    deltas = tuple(f for f, _ in fac.factors)
    a_i = tuple(f.coeffs[0] if f.coeffs[0] != 0 else 1 for f in deltas)
    res_prod = 1
    for i in range(len(deltas)):
        for j in range(len(deltas)):
            if i != j:
                res_prod *= resultant(deltas[i], deltas[j])
    w_f = abs(fac.content * X.w0 * res_prod * math.prod(a_i))
    assert w_f != 0, "separable validated surface cannot give zero here"
    w0 = abs(X.w0)
    extra = tuple(p for p, _ in factor(w_f).factors if w0 % p != 0)
    return DeltaFactorData(deltas, a_i, fac.content, X.w0, w_f, extra)


# --------------------------------------------------------------------------
# the degeneracy count rho* for the discriminant


def varrho_star_delta(X: CubicSurfaceNF, a: int) -> int:
    """Primitive pairs (s, t) mod a with the discriminant divisible by a.

    Multiplicative in a; per prime it is (p - 1) times the number of
    projective root classes.  Only squarefree moduli are accepted.
    """
    if a < 1:
        raise ValueError("modulus must be positive")
    if a == 1:
        return 1
    fa = factor(a)
    if not fa.is_squarefree():
        raise ValueError(f"{a} is not squarefree")
    out = 1
    for p, _ in fa.factors:
        out *= (p - 1) * projective_roots_mod_p(X.disc, p)
    return out


def rho_star_prime_vector(X: CubicSurfaceNF, ps: np.ndarray) -> np.ndarray:
    """varrho_star_delta at every prime in ps, as one array.

    Off the w_f primes this is the per-factor sum of root counts; the
    finitely many w_f primes are recomputed directly from the full
    discriminant.
    """
    data = delta_factor_data(X)
    n = np.zeros(len(ps), dtype=np.int64)
    for f in data.delta_i:
        n += projective_root_counts(f, ps)
    for p, _ in factor(data.w_f).factors:
        hit = int(np.searchsorted(ps, p))
        if hit < len(ps) and ps[hit] == p:
            n[hit] = projective_roots_mod_p(X.disc, p)
    return (ps - 1) * n


# --------------------------------------------------------------------------
# prime statistics of one irreducible factor


def tau_statistics(
    delta: BinaryForm, x: int, exact_threshold: int = 10**4
) -> tuple[Fraction, float]:
    """(sum of tau(p)/p, sum of tau(p) log p / p) over primes p <= x.

    tau counts distinct projective roots mod p.  The first component is
    exact up to the 96-bit floor (fully exact below the threshold); the
    second is float by nature of the log weight.
    """
    fac = factor_over_q(delta)
    if fac.distinct_count != 1 or fac.factors[0][1] != 1 or abs(fac.content) != 1:
        raise ValueError("tau statistics want a primitive irreducible form")
    ps = shared_primes(int(x))
    taus = projective_root_counts(delta, ps)
    plist = ps.tolist()
    tlist = taus.tolist()
    if x <= exact_threshold:
        harmonic = sum((Fraction(t, p) for t, p in zip(tlist, plist)), Fraction(0))
    else:
        acc = _FixedSum()
        for t, p in zip(tlist, plist):
            if t:
                acc.add(t, p)
        harmonic = acc.lower()
    logs = np.log(ps.astype(np.float64))
    weighted = float(np.sum(taus * logs / ps))
    return harmonic, weighted


# --------------------------------------------------------------------------
# Wirsing-style partial sums with exponent fitting


@dataclass(frozen=True)
class WirsingReport:
    function: str
    x: int
    k_hat: float
    c_hat: float
    hypothesis_a15: tuple[float, float]  # (slope of prime log-sum, sup residual)
    hypothesis_a16: float  # worst product ratio over checkpoint pairs
    hypothesis_a17: float  # partial sum of g(p)^2 log p
    sums_at: tuple[tuple[int, object], ...]  # (checkpoint, Fraction | float)


def _default_checkpoints(x: int) -> list[int]:
    cps = set()
    e = 2
    while True:
        v = int(round(10 ** (e / 2)))
        if v > x:
            break
        cps.add(v)
        e += 1
    cps.add(x)
    return sorted(c for c in cps if c >= 2)


def _fit_line(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    # least squares slope/intercept; degenerate spreads collapse to slope 0
    if len(xs) < 2 or float(np.ptp(xs)) < 1e-12:
        return 0.0, float(ys[-1]) if len(ys) else 0.0
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


def wirsing_sum(
    g: MultiplicativeFn,
    x: int,
    checkpoints=None,
    exact_threshold: int = 2000,
) -> WirsingReport:
    """Partial sums of a squarefree-supported multiplicative function.

    Sums at checkpoints below the exact threshold are exact Fractions;
    larger ones use a float sieve (one multiply per prime per multiple).
    k_hat is the slope of the prime sum of g(p) log p against log t, the
    normalization that defines the growth exponent; c_hat is the linear
    coefficient of the checkpoint sums against (log x)^k with the exponent
    snapped to the nearest integer when it is within 0.2 of one.
    """
    x = int(x)
    if x < 2:
        raise ValueError("need x >= 2")
    cps = sorted({int(c) for c in (checkpoints or _default_checkpoints(x)) if c >= 2})
    if not cps:
        raise ValueError("no usable checkpoints (need values >= 2)")
    if cps[-1] > x:
        raise ValueError("checkpoint beyond x")
    if cps[-1] != x:
        cps.append(x)
    ps = shared_primes(x)
    if hasattr(g, "prime_values"):
        gp = np.asarray(g.prime_values(ps), dtype=np.float64)
    else:
        gp = np.array([float(g.at_prime(int(p))) for p in ps], dtype=np.float64)

    # value sieve: vals[a] = prod of g(p) over p | a, then zero non-squarefree
    vals = np.ones(x + 1, dtype=np.float64)
    vals[0] = 0.0
    for p, gv in zip(ps.tolist(), gp.tolist()):
        vals[p::p] *= gv
    for p in ps[ps * ps <= x].tolist():
        vals[p * p :: p * p] = 0.0
    csum = np.cumsum(vals)

    sums_at = []
    for cp in cps:
        if cp <= exact_threshold:
            exact = Fraction(0)
            for a in range(1, cp + 1):
                exact += g.value_at(a)
            sums_at.append((cp, exact))
        else:
            sums_at.append((cp, float(csum[cp])))

    # prime-sum normalization: the exponent is DEFINED by
    # sum_{p<=t} g(p) log p = k log t + O(1), and fitting that line is far
    # less transient-biased than the partial-sum log-log slope, whose
    # finite-x bias is of order k^2/log x (fatal for k >= 2 at desk scale)
    floats = np.array([float(v) for _, v in sums_at], dtype=np.float64)
    cp_arr = np.array(cps, dtype=np.float64)
    logs = np.log(ps.astype(np.float64))
    t_cum = np.cumsum(gp * logs)
    prod_cum = np.cumsum(np.log1p(np.abs(gp)))
    idx = np.searchsorted(ps, cps, side="right") - 1
    t_at = np.where(idx >= 0, t_cum[np.maximum(idx, 0)], 0.0)
    a15_slope, a15_b = _fit_line(np.log(cp_arr), t_at)
    a15_resid = float(np.max(np.abs(t_at - a15_slope * np.log(cp_arr) - a15_b)))
    k_hat = a15_slope
    k_use = float(round(k_hat)) if abs(k_hat - round(k_hat)) <= 0.2 else k_hat
    pos = floats > 0
    if abs(k_use) < 1e-9 or int(pos.sum()) < 2:
        c_hat = float(floats[-1])
    else:
        c_hat, _ = _fit_line(np.log(cp_arr[pos]) ** k_use, floats[pos])
    worst = 0.0
    for i in range(len(cps)):
        for j in range(i + 1, len(cps)):
            if cps[i] < 3 or idx[i] < 0 or idx[j] < 0:
                continue
            prod = math.exp(prod_cum[idx[j]] - prod_cum[idx[i]])
            bound = (math.log(cps[j]) / math.log(cps[i])) ** abs(k_hat)
            worst = max(worst, prod / bound)
    a17 = float(np.sum(gp * gp * logs))
    return WirsingReport(
        function=getattr(g, "name", "g"),
        x=x,
        k_hat=float(k_hat),
        c_hat=float(c_hat),
        hypothesis_a15=(a15_slope, a15_resid),
        hypothesis_a16=float(worst),
        hypothesis_a17=a17,
        sums_at=tuple(sums_at),
    )


def squarefree_harmonic() -> MultiplicativeFn:
    """g(p) = 1/p: partial sums grow like (6/pi^2) log x."""
    g = MultiplicativeFn(lambda p: Fraction(1, p), name="squarefree-harmonic")
    g.prime_values = lambda ps: 1.0 / ps.astype(np.float64)
    return g


def rho_delta_fn(X: CubicSurfaceNF, strict_wf: bool = False) -> MultiplicativeFn:
    """The final-lemma weight: rho*(p) phi(p)^2 / p^4 on coprime primes."""
    W = delta_factor_data(X).w_f if strict_wf else abs(X.w0)
    disc = X.disc

    def at_p(p: int) -> Fraction:
        if W % p == 0:
            return Fraction(0)
        r = (p - 1) * projective_roots_mod_p(disc, p)
        return Fraction(r * (p - 1) ** 2, p**4)

    g = MultiplicativeFn(at_p, name="rho-delta")

    def prime_values(ps: np.ndarray) -> np.ndarray:
        rho = rho_star_prime_vector(X, ps).astype(np.float64)
        pf = ps.astype(np.float64)
        vals = rho * (pf - 1.0) ** 2 / pf**4
        for p, _ in factor(W).factors:
            hit = int(np.searchsorted(ps, p))
            if hit < len(ps) and ps[hit] == p:
                vals[hit] = 0.0
        return vals

    g.prime_values = prime_values
    return g


# --------------------------------------------------------------------------
# the final lemma's sum


def final_lemma_sum(
    X: CubicSurfaceNF,
    x: int,
    strict_wf: bool = False,
    exact_threshold: int = 10**4,
) -> Fraction:
    """Sum over squarefree a <= x coprime to the resultant invariant of
    rho*(a) phi(a)^2 / a^4.

    Exact below the threshold; above it every term is floored at 96
    fractional bits, so the result is a rational lower bound within
    x * 2^-96 of the true value.
    """
    x = int(x)
    if x < 1:
        raise ValueError("need x >= 1")
    W = delta_factor_data(X).w_f if strict_wf else abs(X.w0)
    if x == 1:
        return Fraction(1)
    ps = shared_primes(x)
    rho = rho_star_prime_vector(X, ps)
    rho_at = np.zeros(x + 1, dtype=np.int64)
    rho_at[ps] = rho
    for p, _ in factor(W).factors:
        if p <= x:
            rho_at[p] = 0
    spf = _smallest_factor_table(x)
    exact = x <= exact_threshold
    total = Fraction(1) if exact else None
    acc = _FixedSum()
    if not exact:
        acc.add(1, 1)  # a = 1
    for a in range(2, x + 1):
        m = a
        num = 1
        while m > 1:
            p = int(spf[m])
            m //= p
            if m % p == 0:
                num = 0
                break
            r = int(rho_at[p])
            if r == 0:
                num = 0
                break
            num *= r * (p - 1) * (p - 1)
        if not num:
            continue
        if exact:
            total += Fraction(num, a**4)
        else:
            acc.add(num, a**4)
    return total if exact else acc.lower()


# --------------------------------------------------------------------------
# height-weighted lattice sum in a congruence class


def G_sum(
    X: CubicSurfaceNF,
    sigma: int,
    tau: int,
    a: int,
    x: int,
    exact_threshold: int = 2000,
) -> Fraction:
    """Sum of 1/max(|s|,|t|)^2 over coprime (s,t) = (sigma,tau) mod a,
    s > 0, height <= x, discriminant nonzero.

    Counts pairs row by row at each height, so the rational arithmetic
    touches one term per height value.  Exact below the threshold, 96-bit
    floored above it.
    """
    if a < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(math.gcd(sigma, tau), a) != 1:
        raise ValueError("class not primitive for the modulus")
    x = int(x)
    if x < 1:
        raise ValueError("need x >= 1")
    # coprime zeros of the discriminant: one primitive pair per rational root
    bad = set()
    for f, _ in X.factorization.factors:
        if f.degree != 1:
            continue
        c, d = f.coeffs
        s0, t0 = d, -c
        if s0 < 0 or (s0 == 0 and t0 < 0):
            s0, t0 = -s0, -t0
        if s0 > 0:
            bad.add((s0, t0))
    exact = x <= exact_threshold
    total = Fraction(0)
    acc = _FixedSum()
    for h in range(1, x + 1):
        t_edge = np.arange(-h, h + 1, dtype=np.int64)
        s_all = np.concatenate(
            [
                np.full(2 * h + 1, h, dtype=np.int64),
                np.arange(1, h, dtype=np.int64),
                np.arange(1, h, dtype=np.int64),
            ]
        )
        t_all = np.concatenate(
            [
                t_edge,
                np.full(h - 1, h, dtype=np.int64),
                np.full(h - 1, -h, dtype=np.int64),
            ]
        )
        keep = np.gcd(s_all, np.abs(t_all)) == 1
        if a > 1:
            keep &= ((s_all - sigma) % a == 0) & ((t_all - tau) % a == 0)
        n = int(np.count_nonzero(keep))
        for s0, t0 in bad:
            if max(s0, abs(t0)) == h and math.gcd(s0, abs(t0)) == 1:
                if (s0 - sigma) % a == 0 and (t0 - tau) % a == 0:
                    n -= 1
        if n <= 0:
            continue
        if exact:
            total += Fraction(n, h * h)
        else:
            acc.add(n, h * h)
    return total if exact else acc.lower()
