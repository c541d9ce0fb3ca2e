"""Exhaustive representation counting and constrained (sieved) solution sets.

The recursive solver is exact over a provably sufficient coordinate box; the
range counter is a convolution of per-coordinate square tables and is used
for long sweeps where only counts are needed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import INF, factorize, valuation
from .core import (
    ONES,
    CoefficientVector,
    PolygonalFamily,
    ProblemInstance,
    coordinate_scale,
    target_h,
)


@dataclass(frozen=True)
class RepresentationSet:
    """All integer solutions of the completed-square equation for one coset."""

    instance: ProblemInstance
    d: tuple[int, int, int, int]
    solutions: tuple
    count: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "count", len(self.solutions))


@dataclass(frozen=True)
class ConstraintSpec:
    """Divisibility constraints on solution coordinates.

    forbidden: odd primes none of which may divide a (nonzero) coordinate.
    caps: exponent caps for the always-ramified primes; a coordinate x_j is
        admissible only when ord_p(x_j) < caps[p] for every capped p, which
        in particular rejects x_j = 0.
    allow_zero: exempt zero coordinates from the `forbidden` test (zero is
        divisible by everything, so the strict reading empties every set).
    """

    forbidden: frozenset = frozenset()
    caps: dict = field(default_factory=dict)
    allow_zero: bool = True

    def admits(self, x: int) -> bool:
        if x == 0:
            if self.caps:
                return False
            return self.allow_zero or not self.forbidden
        for p, cap in self.caps.items():
            if valuation(x, p) >= cap:
                return False
        if self.forbidden:
            ax = abs(x)
            for p in self.forbidden:
                if ax % p == 0:
                    return False
        return True


def _coordinate_bounds(a: int, b: int, alpha_j: int, rem: int, margin: int = 0):
    """Inclusive x-range with alpha_j (a x + b)^2 <= rem."""
    bound = math.isqrt(rem // alpha_j) + margin
    lo = -((bound + b) // a)
    hi = (bound - b) // a
    return lo, hi


def _solve_over(m, alpha, d, h, coords, margin=0):
    """All assignments of the given coordinates with the residual consumed
    exactly.  Coordinates are solved in order of decreasing quadratic
    coefficient; the last one is a perfect-square test."""
    scales = {j: coordinate_scale(m, d[j]) for j in coords}
    order = sorted(coords, key=lambda j: -alpha[j] * scales[j][0] ** 2)
    sols = []
    last = order[-1]

    def rec(idx, rem, partial):
        j = order[idx]
        a, b = scales[j]
        if j == last:
            if rem < 0 or rem % alpha[j]:
                return
            s2 = rem // alpha[j]
            s = math.isqrt(s2)
            if s * s != s2:
                return
            for X in {s, -s}:
                num = X - b
                if num % a == 0:
                    partial[j] = num // a
                    sols.append(tuple(partial))
            partial[j] = None
            return
        lo, hi = _coordinate_bounds(a, b, alpha[j], rem, margin)
        for xj in range(lo, hi + 1):
            val = alpha[j] * (a * xj + b) ** 2
            if val > rem:
                continue
            partial[j] = xj
            rec(idx + 1, rem - val, partial)
        partial[j] = None

    rec(0, h, [None, None, None, None])
    return sols


def count_representations(
    instance: ProblemInstance, d=ONES, margin: int = 0, threads: int = 1
) -> RepresentationSet:
    """Exact solution list for the d-scaled problem, lexicographically sorted."""
    m = instance.m
    alpha = instance.alpha.alpha
    d = tuple(d)
    if threads <= 1:
        sols = _solve_over(m, alpha, d, instance.h, range(4), margin)
    else:
        sols = _solve_parallel(m, alpha, d, instance.h, margin, threads)
    sols.sort()
    return RepresentationSet(instance, d, tuple(sols))


def _solve_parallel(m, alpha, d, h, margin, threads):
    """Partition the outermost coordinate range; merge results in fixed order."""
    scales = [coordinate_scale(m, dj) for dj in d]
    j0 = max(range(4), key=lambda j: alpha[j] * scales[j][0] ** 2)
    a, b = scales[j0]
    lo, hi = _coordinate_bounds(a, b, alpha[j0], h, margin)
    xs = list(range(lo, hi + 1))
    chunks = [xs[i::threads] for i in range(threads)]
    rest = [j for j in range(4) if j != j0]

    def work(chunk):
        out = []
        for x0 in chunk:
            val = alpha[j0] * (a * x0 + b) ** 2
            if val > h:
                continue
            for partial in _solve_over(m, alpha, d, h - val, rest, margin):
                sol = list(partial)
                sol[j0] = x0
                out.append(tuple(sol))
        return out

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, chunks))
    return [s for part in parts for s in part]


def count_range(family: PolygonalFamily, alpha: CoefficientVector, n_max: int, d=ONES):
    """r-counts for every n in [0, n_max] at once via square-table convolution.

    Returns a numpy int64 vector indexed by n.
    """
    m = family.m
    H = target_h(m, alpha.alpha, n_max)
    tables = []
    for a_j, d_j in zip(alpha, d):
        a, b = coordinate_scale(m, d_j)
        lo, hi = _coordinate_bounds(a, b, a_j, H)
        xs = np.arange(lo, hi + 1, dtype=np.int64)
        vals = a_j * (a * xs + b) ** 2
        vals = vals[(0 <= vals) & (vals <= H)]
        tables.append(np.bincount(vals, minlength=H + 1))
    c12 = _convolve_trunc(tables[0], tables[1], H)
    c34 = _convolve_trunc(tables[2], tables[3], H)
    full = _convolve_trunc(c12, c34, H)
    base = sum(aj * (m - 4) ** 2 for aj in alpha.alpha)
    idx = 8 * (m - 2) * np.arange(n_max + 1, dtype=np.int64) + base
    return full[idx]


def _convolve_trunc(a, b, H):
    """Truncated convolution; shift-add when one side has sparse support."""
    nz_a = np.nonzero(a)[0]
    nz_b = np.nonzero(b)[0]
    if len(nz_b) > len(nz_a):
        a, b = b, a
        nz_b = nz_a
    if len(nz_b) <= 1024:
        out = np.zeros(H + 1, dtype=np.int64)
        for v in nz_b:
            cnt = int(b[v])
            out[v:] += cnt * a[: H + 1 - v]
        return out
    return np.convolve(a, b)[: H + 1]


def direct_sieve_count(
    instance: ProblemInstance,
    ell=ONES,
    forbidden=frozenset(),
    allow_zero: bool = True,
    solutions=None,
) -> int:
    """Number of solutions of the ell-scaled problem with no coordinate
    divisible by a forbidden prime (zero coordinates exempt by default)."""
    spec = ConstraintSpec(forbidden=frozenset(forbidden), allow_zero=allow_zero)
    if solutions is None:
        solutions = count_representations(instance, ell).solutions
    return sum(1 for x in solutions if all(spec.admits(xj) for xj in x))


def direct_sieve_count_c(
    instance: ProblemInstance,
    ell=ONES,
    forbidden=frozenset(),
    caps=None,
    mode: str = "signed",
    allow_zero: bool = True,
) -> int:
    """Capped sieve count: forbidden primes excluded and ord_p(x_j) < caps[p].

    mode "signed" evaluates the inclusion-exclusion sum over per-prime
    exponent patterns; mode "filter" filters the solution list directly.
    Both agree exactly, including on zero coordinates, which any finite cap
    rejects on either route.
    """
    caps = dict(caps or {})
    if mode == "filter":
        spec = ConstraintSpec(
            forbidden=frozenset(forbidden), caps=caps, allow_zero=allow_zero
        )
        sols = count_representations(instance, ell).solutions
        return sum(1 for x in sols if all(spec.admits(xj) for xj in x))
    if mode != "signed":
        raise ValueError(f"unknown mode {mode!r}")
    total = 0
    for sign, t in _exponent_patterns(sorted(caps), caps):
        scaled = tuple(e * t_i for e, t_i in zip(ell, t))
        total += sign * direct_sieve_count(
            instance, scaled, forbidden, allow_zero=allow_zero
        )
    return total


def _exponent_patterns(primes, caps):
    """Signed scaling vectors from all {0,1}^4 choices per capped prime."""
    patterns = [(1, (1, 1, 1, 1))]
    for p in primes:
        step = p ** caps[p]
        new = []
        for sign, t in patterns:
            for bits in range(16):
                bvec = [(bits >> i) & 1 for i in range(4)]
                s = sign * (-1) ** sum(bvec)
                nt = tuple(t_i * (step if b else 1) for t_i, b in zip(t, bvec))
                new.append((s, nt))
        patterns = new
    return patterns


def prime_factor_count(x: int, mode: str = "with-multiplicity"):
    """Omega(|x|) or omega(|x|); x = 0 returns +inf (divisible by everything)."""
    if x == 0:
        return INF
    fac = factorize(x)
    if mode in ("with-multiplicity", "Omega"):
        return sum(fac.values())
    if mode in ("distinct", "omega"):
        return len(fac)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class WitnessSpec:
    """Admissibility predicate for almost-prime witnesses."""

    factor_bound: float = INF
    exclude_p: frozenset = frozenset()
    allow_zero: bool = True
    mode: str = "with-multiplicity"

    def admits(self, x: int) -> bool:
        if x == 0:
            return self.allow_zero
        if prime_factor_count(x, self.mode) > self.factor_bound:
            return False
        ax = abs(x)
        return all(ax % p for p in self.exclude_p)


def witness_search(
    instance: ProblemInstance,
    factor_bound,
    exclude_p=frozenset(),
    d=ONES,
    allow_zero: bool = True,
    mode: str = "with-multiplicity",
    solutions=None,
) -> RepresentationSet:
    """Solutions whose coordinates are almost prime.

    A nonzero coordinate passes when its prime-factor count is at most
    factor_bound and no prime of exclude_p divides it.  Zero coordinates
    pass only under allow_zero (otherwise they fail every finite bound).
    """
    if solutions is None:
        solutions = count_representations(instance, d).solutions
    spec = WitnessSpec(factor_bound, frozenset(exclude_p), allow_zero, mode)
    good = tuple(x for x in solutions if all(spec.admits(xj) for xj in x))
    return RepresentationSet(instance, tuple(d), good)


def _squares_injective(m: int) -> bool:
    # (a x + b)^2 = (a x' + b)^2 with x != x' needs x + x' = (m-4)/(m-2)
    return (m - 4) % (m - 2) != 0


def witness_coverage(
    family: PolygonalFamily,
    alpha: CoefficientVector,
    n_range,
    specs,
    threads: int = 1,
):
    """Per-spec witness existence over a range of targets.

    Enumerates each target once (sorted-multiset fast path when all four
    coordinates carry the same coefficient and squares are injective) and
    evaluates every spec against the same solutions.  Returns a list of
    boolean vectors, one per spec, aligned with n_range.
    """
    m = family.m
    fast = len(set(alpha.alpha)) == 1 and _squares_injective(m)
    ns = list(n_range)

    def handle(n):
        inst = ProblemInstance(family, alpha, n)
        if fast:
            return _multiset_witnesses(m, alpha.alpha[0], inst.h, specs)
        sols = count_representations(inst).solutions
        return [
            any(all(spec.admits(xj) for xj in x) for x in sols) for spec in specs
        ]

    if threads <= 1:
        rows = [handle(n) for n in ns]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(handle, ns))
    return [[row[i] for row in rows] for i in range(len(specs))]


def _multiset_witnesses(m, alpha0, h, specs):
    """Witness existence for a uniform instance via sorted-square multisets."""
    a, b = coordinate_scale(m, 1)
    lo, hi = _coordinate_bounds(a, b, alpha0, h)
    entries = sorted(
        ((alpha0 * (a * x + b) ** 2, x) for x in range(lo, hi + 1)),
        key=lambda t: t[0],
    )
    entries = [(q, x) for q, x in entries if q <= h]
    qs = [q for q, _ in entries]
    qx = {q: x for q, x in entries}
    qset = set(qs)
    admit = [[spec.admits(x) for _, x in entries] for spec in specs]
    found = [False] * len(specs)
    K = len(entries)
    for i in range(K):
        q1 = qs[i]
        if 4 * q1 > h:
            break
        for j in range(i, K):
            q2 = qs[j]
            if q1 + 3 * q2 > h:
                break
            rem2 = h - q1 - q2
            for k in range(j, K):
                q3 = qs[k]
                rem = rem2 - q3
                if rem < q3:
                    break
                if rem not in qset:
                    continue
                x4 = qx[rem]
                for s, spec in enumerate(specs):
                    if not found[s] and (
                        admit[s][i]
                        and admit[s][j]
                        and admit[s][k]
                        and spec.admits(x4)
                    ):
                        found[s] = True
                if all(found):
                    return found
    return found
