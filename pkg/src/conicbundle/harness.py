"""Experiment orchestration and command-line front end.

Whole-surface counting runs fibre by fibre: enumerate parameter pairs up to
a cutoff, count points on each fibre conic exactly, and merge.  Expensive
per-fibre results are cached in a content-addressed directory of plain-text
records so growth tables and repeated runs reuse overlapping work.  The CLI
exposes the analysis, counting, density, and prime-sum entry points; every
command exits 0 on success, 2 on validation failure, and 3 on a tolerance
failure in strict mode.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .analytic import (
    delta_factor_data,
    rho_delta_fn,
    squarefree_harmonic,
    wirsing_sum,
)
from .conic import CannotCertify, FibreConic, count_points
from .densities import ToleranceNotMet, local_density_report, peyre_constant
from .surface import (
    CubicSurfaceNF,
    FibreIndex,
    SurfaceValidationError,
    brute_force_surface_count,
    domain_B,
    fibre_conic,
    load_surface,
    section_base_directions,
)

DIRECT_HEIGHT_GUARD = 200


# --------------------------------------------------------------------------
# result records


@dataclass
class CountRecord:
    """One whole-surface count.  Equality ignores the timing field."""

    surface_id: str
    height_bound: int
    method: str  # "fibration" | "direct"
    x_cutoff: float | None
    count: int
    excluded_singular_fibres: int
    runtime_ms: int = field(compare=False)

    def to_payload(self) -> dict:
        return {
            "surface_id": self.surface_id,
            "height_bound": self.height_bound,
            "method": self.method,
            "x_cutoff": self.x_cutoff,
            "count": self.count,
            "excluded_singular_fibres": self.excluded_singular_fibres,
            "runtime_ms": self.runtime_ms,
        }

    @classmethod
    def from_payload(cls, data: dict) -> "CountRecord":
        return cls(**data)

    def render(self) -> str:
        cutoff = "" if self.x_cutoff is None else f"{self.x_cutoff:g}"
        return "\n".join(
            [
                f"surface: {self.surface_id}",
                f"height_bound: {self.height_bound}",
                f"method: {self.method}",
                f"x_cutoff: {cutoff}",
                f"count: {self.count}",
                f"excluded_singular_fibres: {self.excluded_singular_fibres}",
                f"runtime_ms: {self.runtime_ms}",
            ]
        )


@dataclass(frozen=True)
class GrowthRow:
    height_bound: int
    count: int
    rho: int
    x_cutoff: float
    excluded_singular_fibres: int

    @property
    def normalized(self) -> float:
        # count / (B (log B)^(rho-1)); positive and finite once B >= 3
        b = self.height_bound
        return self.count / (b * math.log(b) ** (self.rho - 1))


# --------------------------------------------------------------------------
# cache

_CACHE_ENV = "CONICBUNDLE_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(_CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "conicbundle"


class ResultCache:
    """Content-addressed store of computation records.

    A record is keyed by (surface hash, operation name, parameters); the key
    is hashed to a filename and the value kept as one JSON text file, so the
    store is inspectable and safe to delete at any time.
    """

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def _key(surface_id: str, op: str, params: dict) -> str:
        blob = json.dumps(
            {"surface": surface_id, "op": op, "params": params},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(blob.encode()).hexdigest()

    def _path(self, surface_id: str, op: str, params: dict) -> Path:
        return self.root / (self._key(surface_id, op, params) + ".txt")

    def get(self, surface_id: str, op: str, params: dict):
        path = self._path(surface_id, op, params)
        try:
            record = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        # stale or colliding record: ignore rather than trust
        if record.get("surface") != surface_id or record.get("op") != op:
            return None
        return record.get("result")

    def put(self, surface_id: str, op: str, params: dict, result: dict) -> None:
        path = self._path(surface_id, op, params)
        record = {"surface": surface_id, "op": op, "params": params, "result": result}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record, sort_keys=True) + "\n")
        os.replace(tmp, path)


# --------------------------------------------------------------------------
# surface analysis


@dataclass(frozen=True)
class AnalysisReport:
    surface_id: str
    coefficients: dict
    disc_coeffs: tuple
    disc_content: int
    disc_factors: tuple  # ((coeffs, multiplicity), ...)
    distinct_factor_count: int
    picard_rank: int
    w0: int
    w_f: int
    singular_fibres: tuple

    def render(self) -> str:
        lines = [f"surface: {self.surface_id}"]
        for key in ("a", "d", "f", "b", "e"):
            lines.append(f"coefficient {key}: {list(self.coefficients[key])}")
        lines.append(f"discriminant: {_form_str(self.disc_coeffs)}")
        lines.append(f"discriminant content: {self.disc_content}")
        for coeffs, mult in self.disc_factors:
            tag = f"  factor: {_form_str(coeffs)}"
            lines.append(tag if mult == 1 else f"{tag}  (multiplicity {mult})")
        lines.append(f"distinct irreducible factors r: {self.distinct_factor_count}")
        lines.append(f"picard_rank: {self.picard_rank}")
        lines.append(f"w0: {self.w0}")
        lines.append(f"w_f: {self.w_f}")
        if self.singular_fibres:
            shown = ", ".join(f"({i.s} : {i.t})" for i in self.singular_fibres)
        else:
            shown = "none"
        lines.append(f"singular_fibres: {shown}")
        return "\n".join(lines)


def _form_str(coeffs, names=("s", "t")) -> str:
    """Human form of a binary form given leading-first coefficients."""
    deg = len(coeffs) - 1
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        pow_s, pow_t = deg - i, i
        mono = []
        if pow_s:
            mono.append(names[0] if pow_s == 1 else f"{names[0]}^{pow_s}")
        if pow_t:
            mono.append(names[1] if pow_t == 1 else f"{names[1]}^{pow_t}")
        body = "*".join(mono)
        mag = abs(c)
        if not body:
            term = str(mag)
        elif mag == 1:
            term = body
        else:
            term = f"{mag}*{body}"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"+ {term}" if c > 0 else f"- {term}")
    return " ".join(parts) if parts else "0"


def singular_fibre_indices(X: CubicSurfaceNF) -> tuple[FibreIndex, ...]:
    """Fibres over rational zeros of the discriminant, i.e. its linear factors."""
    out = []
    for f, _mult in X.factorization.factors:
        if f.degree != 1:
            continue
        c0, c1 = f.coeffs
        idx = FibreIndex.from_raw(c1, -c0)
        assert X.disc(idx.s, idx.t) == 0
        out.append(idx)
    out.sort(key=lambda i: (i.height, i.s, i.t))
    return tuple(out)


def analyze(X: CubicSurfaceNF) -> AnalysisReport:
    data = delta_factor_data(X)
    fac = X.factorization
    return AnalysisReport(
        surface_id=X.surface_hash,
        coefficients=X.to_dict(),
        disc_coeffs=X.disc.coeffs,
        disc_content=fac.content,
        disc_factors=tuple((f.coeffs, m) for f, m in fac.factors),
        distinct_factor_count=fac.distinct_count,
        picard_rank=X.rho,
        w0=X.w0,
        w_f=data.w_f,
        singular_fibres=singular_fibre_indices(X),
    )


# --------------------------------------------------------------------------
# whole-surface counting


def _count_task(args):
    i, conic, bound = args
    return i, count_points(conic, bound).count


def _fibre_counts(
    X: CubicSurfaceNF,
    fibres: list[FibreIndex],
    bound: int,
    cache: ResultCache | None,
    workers: int,
) -> list[int]:
    """Point count per fibre at height bound, cache-aware, order-preserving."""
    counts: list[int | None] = [None] * len(fibres)
    missing = []
    for i, idx in enumerate(fibres):
        if cache is not None:
            hit = cache.get(
                X.surface_hash, "fibre-count", {"s": idx.s, "t": idx.t, "B": bound}
            )
            if hit is not None:
                counts[i] = int(hit["count"])
                continue
        missing.append(i)

    tasks = [(i, fibre_conic(X, fibres[i]), bound) for i in missing]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_count_task, tasks, chunksize=16))
    else:
        results = [_count_task(t) for t in tasks]
    for i, n in results:
        counts[i] = n
        if cache is not None:
            idx = fibres[i]
            cache.put(
                X.surface_hash,
                "fibre-count",
                {"s": idx.s, "t": idx.t, "B": bound},
                {"count": n},
            )
    assert all(c is not None for c in counts)
    return counts  # type: ignore[return-value]


def count_surface(
    X: CubicSurfaceNF,
    B,
    method: str = "fibration",
    x_cutoff=None,
    *,
    cache: ResultCache | None = None,
    workers: int = 1,
    allow_large_direct: bool = False,
) -> CountRecord:
    """Count rational points of height <= B on the nonsingular fibres.

    fibration: sum of exact conic counts over all fibres of index height up
    to x_cutoff (required, >= 1).  direct: exhaustive search in the ambient
    space, restricted to the same fibre range when x_cutoff is given; guarded
    above height 200 because the search is quartic in B.
    """
    bound = int(B)
    if bound < 1:
        raise ValueError("height bound must be >= 1")
    if method not in ("fibration", "direct"):
        raise ValueError(f"unknown method {method!r}")

    params = {
        "B": bound,
        "method": method,
        "x_cutoff": None if x_cutoff is None else float(x_cutoff),
    }
    if cache is not None:
        hit = cache.get(X.surface_hash, "count-surface", params)
        if hit is not None:
            return CountRecord.from_payload(hit)

    start = time.monotonic()
    if method == "fibration":
        if x_cutoff is None or x_cutoff < 1:
            raise ValueError("fibration method needs x_cutoff >= 1")
        fibres = list(domain_B(X, x_cutoff))
        counts = _fibre_counts(X, fibres, bound, cache, workers)
        total = sum(counts)
        # points where the fibration itself is undefined sit on every fibre
        # conic, so the sum saw each of them once per fibre; they belong to
        # no nonsingular fibre and the direct method drops them entirely
        shared = sum(
            1 for x2, x3 in section_base_directions(X)
            if max(abs(x2), abs(x3)) <= bound
        )
        total -= shared * len(fibres)
        excluded = sum(
            1 for idx in singular_fibre_indices(X) if idx.height <= x_cutoff
        )
    else:
        if bound > DIRECT_HEIGHT_GUARD and not allow_large_direct:
            raise ValueError(
                f"direct method above height {DIRECT_HEIGHT_GUARD} is a "
                "quartic-cost search; pass allow_large_direct to override"
            )
        cap = None if x_cutoff is None else int(x_cutoff)
        res = brute_force_surface_count(X, bound, fibre_height_cap=cap)
        total = res.count
        excluded = len(
            set(
                idx
                for idx in singular_fibre_indices(X)
                if x_cutoff is None or idx.height <= x_cutoff
            )
        )
    record = CountRecord(
        surface_id=X.surface_hash,
        height_bound=bound,
        method=method,
        x_cutoff=params["x_cutoff"],
        count=total,
        excluded_singular_fibres=excluded,
        runtime_ms=int((time.monotonic() - start) * 1000),
    )
    if cache is not None:
        cache.put(X.surface_hash, "count-surface", params, record.to_payload())
    return record


# --------------------------------------------------------------------------
# constant sums


@dataclass
class ConstantSumResult:
    """Sum of leading-constant brackets over the fibres of height <= x."""

    x: float
    lower: Fraction
    upper: Fraction
    fibre_count: int
    failed_fibres: tuple  # quadrature failures, skipped but never hidden

    @property
    def midpoint(self) -> float:
        return float(self.lower + self.upper) / 2

    @property
    def width(self) -> float:
        return float(self.upper - self.lower)


def sum_constants(
    X: CubicSurfaceNF,
    x,
    *,
    tol: float = 1e-3,
    max_depth: int = 24,
    strict: bool = False,
) -> ConstantSumResult:
    if x < 1:
        raise ValueError("height bound must be >= 1")
    lower = Fraction(0)
    upper = Fraction(0)
    failed = []
    n = 0
    for idx in domain_B(X, x):
        conic = fibre_conic(X, idx)
        try:
            lo, hi = peyre_constant(conic, tol=tol, max_depth=max_depth)
        except ToleranceNotMet:
            if strict:
                raise
            failed.append(idx)
            continue
        lower += lo
        upper += hi
        n += 1
    return ConstantSumResult(
        x=float(x),
        lower=lower,
        upper=upper,
        fibre_count=n,
        failed_fibres=tuple(failed),
    )


# --------------------------------------------------------------------------
# growth tables


def growth_table(
    X: CubicSurfaceNF,
    heights,
    *,
    delta: float = 0.25,
    cache: ResultCache | None = None,
    workers: int = 1,
) -> list[GrowthRow]:
    """Fibration counts at each height with the normalization of the
    expected lower-bound order: count / (B (log B)^(rho-1)).

    The fibre cutoff is B**delta, so the table probes the order of growth
    from below; it does not estimate the full point count.
    """
    hs = [int(b) for b in heights]
    if not hs:
        raise ValueError("no heights given")
    if any(b2 <= b1 for b1, b2 in zip(hs, hs[1:])):
        raise ValueError("heights must be strictly increasing")
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    rows = []
    for b in hs:
        cutoff = max(1.0, float(b) ** delta)
        rec = count_surface(
            X, b, "fibration", cutoff, cache=cache, workers=workers
        )
        rows.append(
            GrowthRow(
                height_bound=b,
                count=rec.count,
                rho=X.rho,
                x_cutoff=cutoff,
                excluded_singular_fibres=rec.excluded_singular_fibres,
            )
        )
    return rows


def write_growth_csv(rows: list[GrowthRow], out_path) -> None:
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["height_bound", "x_cutoff", "count", "excluded_singular_fibres",
             "rho", "normalized"]
        )
        for r in rows:
            w.writerow(
                [r.height_bound, f"{r.x_cutoff:g}", r.count,
                 r.excluded_singular_fibres, r.rho, f"{r.normalized:.6f}"]
            )


# --------------------------------------------------------------------------
# CLI


def _add_surface_arg(sub):
    sub.add_argument("surface", help="path to a surface coefficient JSON file")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conicbundle",
        description="point counts, local densities and prime sums for "
        "conic-bundle cubic surfaces",
    )
    p.add_argument(
        "--cache-dir",
        default=None,
        help=f"cache directory (default ${_CACHE_ENV} or ~/.cache/conicbundle)",
    )
    p.add_argument(
        "--no-cache", action="store_true", help="disable the result cache"
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="validate a surface and report its invariants")
    _add_surface_arg(sp)

    sp = sub.add_parser("count-fibre", help="exact point count on one fibre conic")
    _add_surface_arg(sp)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--height", type=float, required=True)
    sp.add_argument("--dump-points", action="store_true")

    sp = sub.add_parser("densities", help="local density report for one fibre")
    _add_surface_arg(sp)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-4)

    sp = sub.add_parser("count-surface", help="count points over all fibres")
    _add_surface_arg(sp)
    sp.add_argument("--height", type=float, required=True)
    sp.add_argument("--method", choices=("fibration", "direct"), default="fibration")
    sp.add_argument("--cutoff", type=float, default=None, help="fibre height cutoff")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument(
        "--force-direct",
        action="store_true",
        help=f"allow the direct method above height {DIRECT_HEIGHT_GUARD}",
    )

    sp = sub.add_parser("sum-constants", help="sum leading constants over fibres")
    _add_surface_arg(sp)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--strict", action="store_true",
                    help="abort on any quadrature tolerance failure")

    sp = sub.add_parser("growth", help="growth table across several heights")
    _add_surface_arg(sp)
    sp.add_argument("--heights", required=True, help="comma-separated, increasing")
    sp.add_argument("--delta", type=float, default=0.25,
                    help="fibre cutoff exponent (cutoff = B**delta)")
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("wirsing-check", help="multiplicative-sum diagnostics")
    sp.add_argument(
        "--function",
        required=True,
        choices=("squarefree-harmonic", "rho-delta"),
    )
    sp.add_argument("--surface", default=None,
                    help="surface file (required for rho-delta)")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--checkpoints", default=None, help="comma-separated")
    return p


def _cache_from_args(args) -> ResultCache | None:
    if args.no_cache:
        return None
    root = args.cache_dir if args.cache_dir else default_cache_dir()
    return ResultCache(root)


def _cmd_analyze(args) -> int:
    X = load_surface(args.surface)
    print(analyze(X).render())
    return 0


def _cmd_count_fibre(args) -> int:
    X = load_surface(args.surface)
    idx = FibreIndex.from_raw(args.s, args.t)
    conic = fibre_conic(X, idx)
    res = count_points(conic, args.height, want_points=args.dump_points)
    print(f"fibre: ({idx.s} : {idx.t})")
    print(f"determinant: {conic.pi_det}")
    print(f"count: {res.count}")
    if args.dump_points:
        for pt in sorted(res.points, key=lambda q: (q.height, q.triple)):
            x, y, z = pt.triple
            print(f"point: ({x} : {y} : {z})  height={pt.height}")
    return 0


def _cmd_densities(args) -> int:
    X = load_surface(args.surface)
    idx = FibreIndex.from_raw(args.s, args.t)
    conic = fibre_conic(X, idx)
    rep = local_density_report(conic, tol=args.tol)
    print(f"fibre: ({idx.s} : {idx.t})")
    print(f"determinant: {rep.determinant}")
    if not rep.bad_primes:
        print("bad_primes: none")
    for row in rep.bad_primes:
        rhos = ", ".join(f"rho*({row.p}^{d})={r}" for d, r in enumerate(row.rho_values, 1))
        print(
            f"prime {row.p} (valuation {row.valuation}): "
            f"sigma_p = {row.sigma} = {float(row.sigma):.9f}  [{rhos}]"
        )
    print(f"sigma_inf: [{float(rep.sigma_inf_lower):.9f}, {float(rep.sigma_inf_upper):.9f}]")
    print(f"zeta2: [{float(rep.zeta2_lower):.12f}, {float(rep.zeta2_upper):.12f}]")
    print(f"constant: [{float(rep.constant_lower):.9f}, {float(rep.constant_upper):.9f}]")
    return 0


def _cmd_count_surface(args) -> int:
    X = load_surface(args.surface)
    record = count_surface(
        X,
        args.height,
        args.method,
        args.cutoff,
        cache=_cache_from_args(args),
        workers=args.workers,
        allow_large_direct=args.force_direct,
    )
    print(record.render())
    return 0


def _cmd_sum_constants(args) -> int:
    X = load_surface(args.surface)
    res = sum_constants(X, args.x, tol=args.tol, strict=args.strict)
    print(f"x: {res.x:g}")
    print(f"fibres: {res.fibre_count}")
    print(f"sum_lower: {float(res.lower):.9f}")
    print(f"sum_upper: {float(res.upper):.9f}")
    print(f"width: {res.width:.3e}")
    if res.failed_fibres:
        shown = ", ".join(f"({i.s} : {i.t})" for i in res.failed_fibres)
        print(f"failed_fibres: {shown}")
    else:
        print("failed_fibres: none")
    return 0


def _cmd_growth(args) -> int:
    X = load_surface(args.surface)
    heights = [int(v) for v in args.heights.split(",") if v.strip()]
    rows = growth_table(
        X,
        heights,
        delta=args.delta,
        cache=_cache_from_args(args),
        workers=args.workers,
    )
    write_growth_csv(rows, args.out)
    for r in rows:
        print(
            f"B={r.height_bound}  cutoff={r.x_cutoff:g}  count={r.count}  "
            f"normalized={r.normalized:.6f}"
        )
    print(f"wrote: {args.out}")
    return 0


def _cmd_wirsing_check(args) -> int:
    if args.function == "squarefree-harmonic":
        g = squarefree_harmonic()
    else:
        if not args.surface:
            raise ValueError("rho-delta needs --surface")
        g = rho_delta_fn(load_surface(args.surface))
    cps = None
    if args.checkpoints:
        cps = [int(v) for v in args.checkpoints.split(",") if v.strip()]
    rep = wirsing_sum(g, args.x, checkpoints=cps)
    print(f"function: {rep.function}")
    print(f"x: {rep.x:g}")
    print(f"k_hat: {rep.k_hat:.4f}")
    print(f"c_hat: {rep.c_hat:.6f}")
    slope, resid = rep.hypothesis_a15
    print(f"prime_logsum_fit: slope={slope:.4f} max_residual={resid:.4f}")
    print(f"ratio_bound: {rep.hypothesis_a16:.4f}")
    print(f"square_weight: {rep.hypothesis_a17:.4f}")
    for cp, s in rep.sums_at:
        print(f"sum_at {cp}: {float(s):.9f}")
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "count-fibre": _cmd_count_fibre,
    "densities": _cmd_densities,
    "count-surface": _cmd_count_surface,
    "sum-constants": _cmd_sum_constants,
    "growth": _cmd_growth,
    "wirsing-check": _cmd_wirsing_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ToleranceNotMet as exc:
        print(f"error[ToleranceNotMet]: {exc}", file=sys.stderr)
        return 3
    except SurfaceValidationError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except (ValueError, CannotCertify, OSError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
