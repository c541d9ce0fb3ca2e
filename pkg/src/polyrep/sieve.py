"""Divisor weights for the linear sieve, bracketing sums, main-term products,
and the desk-scale driver with its exact threshold arithmetic.

Weights follow the beta-sieve chain conditions with strict inequalities; the
index-zero condition on the lower weights is vacuous (the standard reading),
so single primes always carry weight -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath as mp

from .arith import (
    factorize,
    is_squarefree,
    moebius,
    prime_divisors,
    primes_upto,
    squarefree_divisors,
)
from .core import (
    ONES,
    CoefficientVector,
    PolygonalFamily,
    ProblemInstance,
    require_theorem_mode,
    target_h,
)
from .eisenstein import beta_value, density_for, eisenstein_rational
from .enumeration import (
    ConstraintSpec,
    WitnessSpec,
    count_representations,
    witness_coverage,
)
from .errors import BudgetExceededError, ConfigurationError, DispatchError

MAX_POOL = 12


def _chain_holds(primes_desc, D, beta, parity: int) -> bool:
    """Chain conditions p_m < (D / (p_1 ... p_m))^(1/beta) at indices of the
    given parity (1: odd positions; 0: even positions >= 2)."""
    D = Fraction(D)
    beta = Fraction(beta)
    a, b = beta.numerator, beta.denominator
    prefix = 1
    for idx, pm in enumerate(primes_desc, start=1):
        prefix *= pm
        if idx % 2 == parity % 2 and (parity == 1 or idx >= 2):
            # p_m < (D/prefix)^(1/beta)  <=>  p_m^beta * prefix < D
            if Fraction(pm) ** a * prefix**b >= D**b:
                return False
    return True


def rosser_lambda(d: int, D, beta, sign: str) -> int:
    """Upper/lower divisor weight of d for level D and sifting exponent beta.

    d must be squarefree with odd prime factors; the value is (-1)^r when the
    sign's chain conditions hold and 0 otherwise.
    """
    if d < 1:
        raise DispatchError(f"weight argument must be positive, got {d}")
    if d == 1:
        return 1
    fac = factorize(d)
    if any(e > 1 for e in fac.values()):
        raise DispatchError(f"weight argument must be squarefree, got {d}")
    if 2 in fac:
        raise DispatchError(f"weight argument must be odd, got {d}")
    primes_desc = sorted(fac, reverse=True)
    r = len(primes_desc)
    if sign in ("+", "plus", "upper"):
        parity = 1
    elif sign in ("-", "minus", "lower"):
        parity = 0
    else:
        raise ValueError(f"unknown sign {sign!r}")
    ok = _chain_holds(primes_desc, D, beta, parity)
    return (-1) ** r if ok else 0


def capital_lambda_minus(d: int, D, beta) -> int:
    """4 * lambda^- - 3 * lambda^+; bounded by 7 in absolute value."""
    val = 4 * rosser_lambda(d, D, beta, "-") - 3 * rosser_lambda(d, D, beta, "+")
    assert abs(val) <= 7
    return val


@dataclass(frozen=True)
class SieveWeightTable:
    """Weights over the squarefree products of an odd-prime pool."""

    D: Fraction
    beta: Fraction
    sign: str
    pool: tuple
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.pool) > MAX_POOL:
            raise BudgetExceededError(2 ** len(self.pool), 2**MAX_POOL, "pool size")
        if any(p == 2 for p in self.pool):
            raise DispatchError("weight pools contain odd primes only")
        w = {}
        for d in _squarefree_products(self.pool):
            v = rosser_lambda(d, self.D, self.beta, self.sign)
            if v:
                w[d] = v
        object.__setattr__(self, "weights", w)

    def support(self):
        return sorted(self.weights)

    def __getitem__(self, d):
        return self.weights.get(d, 0)


def _squarefree_products(pool):
    out = [1]
    for p in pool:
        out += [d * p for d in out]
    return sorted(out)


def weight_sandwich_check(c: int, D, beta) -> dict:
    """Divisor-sum sandwich at one squarefree modulus c."""
    divs = squarefree_divisors(c)
    lo = sum(rosser_lambda(d, D, beta, "-") for d in divs)
    mid = sum(moebius(d) for d in divs)
    hi = sum(rosser_lambda(d, D, beta, "+") for d in divs)
    return {"c": c, "lower": lo, "moebius": mid, "upper": hi, "ok": lo <= mid <= hi}


def quadruple_sandwich_check(cs, D, beta) -> dict:
    """Four-modulus product inequality: prod of moebius sums is at least the
    symmetric lower-weight combination minus 3 prod of upper sums."""
    S_minus, S_mu, S_plus = [], [], []
    for c in cs:
        divs = squarefree_divisors(c)
        S_minus.append(sum(rosser_lambda(d, D, beta, "-") for d in divs))
        S_mu.append(sum(moebius(d) for d in divs))
        S_plus.append(sum(rosser_lambda(d, D, beta, "+") for d in divs))
    lhs = math.prod(S_mu)
    rhs = sum(
        S_minus[k] * math.prod(S_plus[j] for j in range(4) if j != k)
        for k in range(4)
    ) - 3 * math.prod(S_plus)
    return {"cs": tuple(cs), "lhs": lhs, "rhs": rhs, "ok": lhs >= rhs}


def harmonic_H(n: int) -> float:
    """prod over p | n of (1 + p^(-1/2))."""
    if n < 1:
        raise ValueError("positive argument required")
    out = 1.0
    for p in prime_divisors(n):
        out *= 1 + p**-0.5
    return out


def sieve_pool(z: float, alpha: CoefficientVector, cap: int = MAX_POOL) -> list[int]:
    """Primes up to z coprime to 2 prod(alpha), capped for exhaustive sums."""
    pool = [p for p in primes_upto(int(z)) if (2 * alpha.product) % p != 0]
    if len(pool) > cap:
        raise BudgetExceededError(len(pool), cap, "sieve pool")
    return pool


def ramified_primes(alpha: CoefficientVector) -> list[int]:
    return prime_divisors(2 * alpha.product)


def default_caps(alpha: CoefficientVector, c: int = 1) -> dict:
    return {p: c for p in ramified_primes(alpha)}


def capital_C(instance: ProblemInstance, p: int, c_p: int) -> Fraction:
    """Cap-filter density factor at a ramified prime: signed sum over exponent
    patterns of (p^-|b| * density ratio)^(c_p)."""
    b1 = density_for(instance, ONES, p, "closed")
    total = Fraction(0)
    for bits in range(16):
        bvec = [(bits >> i) & 1 for i in range(4)]
        k = sum(bvec)
        d = tuple(p**b for b in bvec)
        bc = density_for(instance, d, p, "closed")
        ratio = Fraction(1, p**k) * bc / b1
        total += (-1) ** k * ratio**c_p
    return total


def main_term_W(instance: ProblemInstance, z0: float, caps: dict | None = None) -> Fraction:
    """Main-term density product: cap filters at ramified primes times
    (1 - beta(single)) over the pool below z0."""
    if z0 < 3:
        raise ConfigurationError("z0 must be at least 3")
    caps = caps if caps is not None else default_caps(instance.alpha)
    out = Fraction(1)
    for p, c_p in sorted(caps.items()):
        out *= capital_C(instance, p, c_p)
    for p in sieve_pool(z0, instance.alpha):
        out *= 1 - beta_value(p, (1, 0, 0, 0), instance)
    return out


def beta_weighted_sums(
    instance: ProblemInstance, pool, D, beta, sign: int
) -> Fraction:
    """Quadruple divisor sums with joint scaling-ratio weights.

    sign +1 uses upper weights in all four slots; sign -1 uses the combined
    lower weight in the first slot.  Exact rational accumulation over the
    nonzero-weight support.
    """
    plus = SieveWeightTable(Fraction(D), Fraction(beta), "+", tuple(pool))
    if sign == 1:
        first = dict(plus.weights)
    elif sign == -1:
        minus = SieveWeightTable(Fraction(D), Fraction(beta), "-", tuple(pool))
        first = {}
        for d in set(plus.weights) | set(minus.weights):
            v = 4 * minus[d] - 3 * plus[d]
            if v:
                first[d] = v
    else:
        raise ValueError("sign must be +1 or -1")
    sup1 = sorted(first)
    sup = plus.support()
    total = Fraction(0)
    cache: dict = {}
    for d1 in sup1:
        w1 = first[d1]
        for d2 in sup:
            w12 = w1 * plus[d2]
            for d3 in sup:
                w123 = w12 * plus[d3]
                for d4 in sup:
                    w = w123 * plus[d4]
                    key = (d1, d2, d3, d4)
                    bp = cache.get(key)
                    if bp is None:
                        bp = _joint_beta(instance, key)
                        cache[key] = bp
                    total += w * bp
    return total


def _joint_beta(instance, dvec) -> Fraction:
    out = Fraction(1)
    prod_d = 1
    for dj in dvec:
        prod_d *= dj
    for p in prime_divisors(prod_d):
        c = tuple(1 if dj % p == 0 else 0 for dj in dvec)
        out *= beta_value(p, c, instance)
    return out


def sieve_count(
    instance: ProblemInstance,
    ell=ONES,
    forbidden=frozenset(),
    caps: dict | None = None,
    solutions=None,
) -> int:
    """Constrained count S_{c,h}: caps at ramified primes, forbidden primes
    excluded from coordinates (cap rejection covers zero coordinates)."""
    spec = ConstraintSpec(
        forbidden=frozenset(forbidden), caps=dict(caps or {}), allow_zero=False
    )
    if solutions is None:
        solutions = count_representations(instance, ell).solutions
    return sum(1 for x in solutions if all(spec.admits(xj) for xj in x))


def weighted_sieve_sum(
    instance: ProblemInstance,
    ell=ONES,
    caps: dict | None = None,
    forbidden_base=frozenset(),
    pool=(),
    D=Fraction(10),
    beta=Fraction(1),
    mode: str = "enum",
    sign: int = -1,
):
    """Weighted quadruple sum bracketing the fully sifted count.

    mode "enum": one exact enumeration of the base constrained set, with the
    per-solution divisor weights accumulated pointwise (identical to the
    expanded sum over scaling vectors by exchanging the order of summation).
    mode "main": scaling-vector expansion with counts replaced by the
    main-term rational parts; returns a Fraction in units of the common
    transcendental factor times the unit-scaling main term.
    """
    caps = caps if caps is not None else default_caps(instance.alpha)
    pool = tuple(pool)
    bad = set(forbidden_base) | set(caps)
    if any(p in bad for p in pool):
        raise ConfigurationError("pool primes must be disjoint from base constraints")
    plus = SieveWeightTable(Fraction(D), Fraction(beta), "+", pool)
    minus = SieveWeightTable(Fraction(D), Fraction(beta), "-", pool)

    def slot_weights(xj, table_first: bool):
        g = math.gcd(abs(xj), math.prod(pool)) if xj else math.prod(pool)
        divs = squarefree_divisors(g)
        if table_first:
            return sum(4 * minus[dd] - 3 * plus[dd] for dd in divs)
        return sum(plus[dd] for dd in divs)

    if mode == "enum":
        spec = ConstraintSpec(
            forbidden=frozenset(forbidden_base), caps=dict(caps), allow_zero=False
        )
        sols = count_representations(instance, ell).solutions
        total = 0
        for x in sols:
            if not all(spec.admits(xj) for xj in x):
                continue
            w1 = slot_weights(x[0], sign == -1)
            if w1 == 0:
                continue
            w = w1
            for xj in x[1:]:
                w *= slot_weights(xj, False)
                if w == 0:
                    break
            total += w
        return total
    if mode != "main":
        raise ValueError(f"unknown mode {mode!r}")
    return _weighted_main_term(instance, ell, caps, pool, plus, minus, sign)


def _weighted_main_term(instance, ell, caps, pool, plus, minus, sign):
    """Scaling-vector expansion against main-term rational parts."""
    if sign == -1:
        first = {
            d: 4 * minus[d] - 3 * plus[d]
            for d in set(plus.weights) | set(minus.weights)
            if 4 * minus[d] - 3 * plus[d]
        }
    else:
        first = dict(plus.weights)
    sup1, sup = sorted(first), plus.support()
    total = Fraction(0)
    for d1 in sup1:
        for d2 in sup:
            for d3 in sup:
                for d4 in sup:
                    w = first[d1] * plus[d2] * plus[d3] * plus[d4]
                    if w == 0:
                        continue
                    dvec = (d1, d2, d3, d4)
                    scaled = tuple(e * dj for e, dj in zip(ell, dvec))
                    total += w * _capped_main_rational(instance, scaled, caps)
    return total


def _capped_main_rational(instance, ell, caps) -> Fraction:
    """Inclusion-exclusion of main-term rational parts over cap patterns."""
    from .enumeration import _exponent_patterns

    total = Fraction(0)
    for s, t in _exponent_patterns(sorted(caps), caps):
        scaled = tuple(e * t_i for e, t_i in zip(ell, t))
        rational, _, obstruction, _ = eisenstein_rational(instance, scaled, "closed")
        if obstruction is None:
            total += s * rational
    return total


# ---------------------------------------------------------------------------
# driver and exact threshold arithmetic


@dataclass(frozen=True)
class SieveConfig:
    """Driver parameters; thresholds are exact Fractions where comparisons are."""

    theta: Fraction = Fraction(1, 1978)
    s: int = 38
    z0: float = 10.0
    z: float = 1000.0
    factor_bound: int = 3
    caps: dict = field(default_factory=dict)
    B: float = 1.0
    C: float = 1.0
    delta_exponent: float = 0.5
    digits: int = 50

    def __post_init__(self):
        if not (3 <= self.z0 < self.z):
            raise ConfigurationError("need 3 <= z0 < z")
        if self.theta <= 0:
            raise ConfigurationError("theta must be positive")

    @property
    def s0(self) -> float:
        return math.log(float(self.z)) / math.log(float(self.z0))


def theta_gate(theta: Fraction) -> dict:
    """Exact threshold arithmetic for the almost-prime exponent."""
    theta = Fraction(theta)
    arithmetic = 988 * theta + Fraction(1, 2) < 1
    strict = theta < Fraction(1, 1977)
    return {
        "theta": theta,
        "arithmetic_988": arithmetic,  # exactly theta < 1/1976
        "below_1_1977": strict,
        "boundary_1_1976": 988 * theta + Fraction(1, 2) == 1,
        "ok": arithmetic and strict,
    }


def s_gate(s: int = 38, digits: int = 50) -> dict:
    """Positivity of 1 - e^(37-s) * 1.083^10 at the working precision."""
    with mp.workdps(digits + 10):
        margin = 1 - mp.e ** (37 - s) * mp.mpf("1.083") ** 10
        return {"s": s, "margin": margin, "ok": margin > 0}


def kappa_constant(z: float, z0: float, digits: int = 50):
    """zeta(4) (1 + 1/(2 log^2 z))^4 (1 + 1/log^2 z0)^4."""
    with mp.workdps(digits + 10):
        lz, lz0 = mp.log(z), mp.log(z0)
        return mp.zeta(4) * (1 + 1 / (2 * lz**2)) ** 4 * (1 + 1 / lz0**2) ** 4


def final_positivity(h: int, alpha_product: int, cfg: SieveConfig, digits: int = 50) -> dict:
    """Desk-scale evaluation of the closing lower-bound expression: main term
    (log z0)^13 / (log z)^16 * prod(alpha)^(-1/2) h^(1-eps) against the error
    h^(988 theta + 1/2 + eps) prod(alpha)^(11/4 + eps)."""
    eps = 0.01
    with mp.workdps(digits + 10):
        lz0, lz = mp.log(cfg.z0), mp.log(cfg.z)
        main = lz0**13 / lz**16 * mp.mpf(alpha_product) ** mp.mpf(-0.5) * mp.mpf(h) ** (1 - eps)
        err = mp.mpf(h) ** (float(988 * cfg.theta) + 0.5 + eps) * mp.mpf(
            alpha_product
        ) ** (2.75 + eps)
        return {"main": main, "error": err, "positive": main > err}


def threshold_check(
    m: int, alpha, n: int, epsilon: Fraction = Fraction(0), const: Fraction = Fraction(1)
) -> dict:
    """Exact comparison h >= const * (2(m-2))^(21+eps) * prod(alpha)^(6+eps).

    With eps = a/b both sides are raised to the b-th power so the comparison
    is pure integer arithmetic.
    """
    epsilon = Fraction(epsilon)
    const = Fraction(const)
    alpha = tuple(alpha)
    h = target_h(m, alpha, n)
    a, b = epsilon.numerator, epsilon.denominator
    M = 2 * (m - 2)
    prod_alpha = math.prod(alpha)
    lhs = Fraction(h) ** b
    rhs = const**b * Fraction(M) ** (21 * b + a) * Fraction(prod_alpha) ** (6 * b + a)
    ok = lhs >= rhs
    # smallest admissible n solves 8(m-2) n >= bound - sum alpha (m-4)^2
    base = sum(aj * (m - 4) ** 2 for aj in alpha)
    return {
        "m": m,
        "alpha": alpha,
        "n": n,
        "h": h,
        "epsilon": epsilon,
        "const": const,
        "ok": ok,
        "min_n": _threshold_min_n(m, alpha, epsilon, const, base),
    }


def _threshold_min_n(m, alpha, epsilon, const, base) -> int:
    a, b = epsilon.numerator, epsilon.denominator
    M = 2 * (m - 2)
    prod_alpha = math.prod(alpha)
    rhs = const**b * Fraction(M) ** (21 * b + a) * Fraction(prod_alpha) ** (6 * b + a)
    lo, hi = 0, 1
    while Fraction(target_h(m, alpha, hi)) ** b < rhs:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if Fraction(target_h(m, alpha, mid)) ** b >= rhs:
            hi = mid
        else:
            lo = mid + 1
    return lo


def threshold_grid(ms, alphas, epsilon=Fraction(0), const=Fraction(1)) -> list[dict]:
    return [
        threshold_check(m, al, 0, epsilon, const) for m in ms for al in alphas
    ]


@dataclass
class DriverReport:
    config: SieveConfig
    theta: dict = field(default_factory=dict)
    s_check: dict = field(default_factory=dict)
    kappa: object = None
    z0_policy: dict = field(default_factory=dict)
    positivity: dict = field(default_factory=dict)
    coverage: list = field(default_factory=list)
    coverage_fraction: float = 0.0

    @property
    def gates_ok(self) -> bool:
        return bool(self.theta.get("ok")) and bool(self.s_check.get("ok"))


def theorem_driver(
    family: PolygonalFamily,
    alpha: CoefficientVector,
    n_range,
    cfg: SieveConfig,
    threads: int = 1,
) -> DriverReport:
    """Desk-scale driver: exact gate arithmetic, the lower-bound constants,
    and a witness sweep with the configured factor bound and prime floor."""
    require_theorem_mode(family)
    ns = list(n_range)
    report = DriverReport(config=cfg)
    report.theta = theta_gate(cfg.theta)
    report.s_check = s_gate(cfg.s, cfg.digits)
    report.kappa = kappa_constant(cfg.z, cfg.z0, cfg.digits)
    z0_star = math.log(float(cfg.z)) ** 33
    report.z0_policy = {
        "z0_from_policy": z0_star,
        "policy_consistent": 3 <= cfg.z0 < cfg.z,
    }
    h_top = target_h(family.m, alpha.alpha, max(ns)) if ns else 1
    report.positivity = final_positivity(h_top, alpha.product, cfg, cfg.digits)
    specs = []
    for n in ns:
        floor = float(n) ** float(cfg.theta)
        excl = frozenset(
            p for p in primes_upto(int(floor)) if (2 * alpha.product) % p != 0
        )
        specs.append(
            WitnessSpec(cfg.factor_bound, excl, allow_zero=True)
        )
    # witness sweeps share the enumeration when the exclusion sets coincide
    uniform_excl = len({s.exclude_p for s in specs}) <= 1
    if uniform_excl and ns:
        flags = witness_coverage(family, alpha, ns, [specs[0]], threads)[0]
    else:
        flags = []
        for n, spec in zip(ns, specs):
            flags.extend(witness_coverage(family, alpha, [n], [spec], threads)[0])
    report.coverage = list(zip(ns, flags))
    report.coverage_fraction = (sum(flags) / len(flags)) if flags else 1.0
    return report
