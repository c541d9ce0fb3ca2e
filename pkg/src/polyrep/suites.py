"""Seeded property sweeps shared by the CLI and the acceptance tests.

Each suite returns (records, summary) with summary["ok"] the overall verdict;
case generation is driven entirely by one integer seed.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .arith import primes_upto, valuation
from .core import CoefficientVector, PolygonalFamily, ProblemInstance, make_instance
from .densities import (
    density_oracle,
    local_density,
    oracle_min_depth,
)
from .eisenstein import (
    beta_envelope_check,
    beta_product,
    check_beta_bounds,
    decomposition_residual,
    eisenstein_rational,
    g_correlation,
    g_correlation_bound,
    gamma_quotient,
)
from .errors import BudgetExceededError
from .sieve import (
    quadruple_sandwich_check,
    s_gate,
    theta_gate,
    weight_sandwich_check,
)

_ALPHA_POOL = (3, 5, 7, 11, 13)


def sample_alpha(rng: random.Random, pool=_ALPHA_POOL, max_primes: int = 2):
    """Coefficient 4-tuple with odd squarefree product."""
    k = min(rng.randint(0, max_primes), len(pool))
    primes = rng.sample(pool, k=k)
    alpha = [1, 1, 1, 1]
    for q in primes:
        alpha[rng.randrange(4)] *= q
    return tuple(alpha)


def _odd_m(rng, lo=3, hi=29, avoid_p=None):
    while True:
        m = rng.randrange(lo, hi + 1)
        if m % 2 == 0:
            continue
        if avoid_p and (m - 2) % avoid_p == 0:
            continue
        return m


def _oracle_matches(instance, d, p, closed_value, max_modulus=3000) -> dict:
    """Oracle comparison with the conductor-based depth when affordable and a
    capped fixed depth (stability still required) otherwise."""
    try:
        oracle = density_oracle(p, instance, d)
        mode = "auto"
    except BudgetExceededError:
        k = 3
        while p ** (k + 1) <= max_modulus:
            k += 1
        oracle = density_oracle(p, instance, d, k=k)
        mode = f"fixed-k={k}"
        assert oracle.stable, "capped-depth oracle did not stabilize"
    return {
        "p": p,
        "oracle": oracle.value,
        "closed": closed_value,
        "depth": oracle.depth,
        "mode": mode,
        "ok": oracle.value == closed_value and oracle.stable,
    }


def density_oracle_suite(cases: int = 100, seed: int = 1, max_modulus: int = 3000):
    """Closed form versus counting oracle, per closed-form method."""
    rng = random.Random(seed)
    records = []

    def sample_dyadic():
        while True:
            m = _odd_m(rng)
            alpha = sample_alpha(rng, max_primes=1)
            d = tuple(rng.choice((1, 1, 2, 3, 4)) for _ in range(4))
            n = rng.randrange(0, 60)
            inst = make_instance(m, alpha, n)
            if 2 ** (oracle_min_depth(2, inst, d) + 1) <= 4096:
                return inst, d

    for _ in range(cases):
        inst, d = sample_dyadic()
        closed = local_density(inst, d, 2, "dyadic").value
        rec = _oracle_matches(inst, d, 2, closed)
        rec["method"] = "dyadic"
        records.append(rec)

    for _ in range(cases):
        p = rng.choice((3, 3, 5, 7))
        k = rng.choice((1, 3)) if p == 3 else 1
        m = 2 + p * k
        if m % 2 == 0:
            m += p
        scaled = rng.randrange(0, 5)  # how many coordinates pick up the prime
        d = tuple(
            p * rng.choice((1, 2)) if i < scaled else rng.choice((1, 2, 3))
            for i in range(4)
        )
        alpha = sample_alpha(rng, pool=tuple(q for q in _ALPHA_POOL if q != p))
        n = rng.randrange(0, 60)
        inst = make_instance(m, alpha, n)
        closed = local_density(inst, d, p, "divisor").value
        rec = _oracle_matches(inst, d, p, closed, max_modulus)
        rec["method"] = "divisor"
        records.append(rec)

    for _ in range(cases):
        p = rng.choice((3, 5, 5, 7, 11, 13))
        m = _odd_m(rng, avoid_p=p)
        alpha = sample_alpha(rng)
        scaled = rng.randrange(0, 3)
        d = tuple(p if i < scaled else rng.choice((1, 1, 2, 3)) for i in range(4))
        n = rng.randrange(0, 60)
        inst = make_instance(m, alpha, n)
        closed = local_density(inst, d, p, "explicit").value
        rec = _oracle_matches(inst, d, p, closed, max_modulus)
        rec["method"] = "explicit"
        records.append(rec)

    ok = all(r["ok"] for r in records)
    return records, {"ok": ok, "cases": len(records)}


def _good_prime_instance(rng, want_dividing: bool):
    """Instance plus odd prime in one of the two bound-lemma classes."""
    while True:
        p = rng.choice((5, 7, 11, 13)) if want_dividing else rng.choice((3, 5, 7, 11, 13))
        m = _odd_m(rng, 3, 33)
        if ((m - 2) * (m - 4)) % p == 0:
            continue
        if want_dividing:
            alpha = list(sample_alpha(rng, pool=tuple(q for q in (3, 5, 7) if q != p and (m - 2) * (m - 4) % q != 0), max_primes=1))
            alpha[rng.randrange(4)] *= p
            alpha = tuple(alpha)
            prod = alpha[0] * alpha[1] * alpha[2] * alpha[3]
            if prod % 2 == 0:
                continue
        else:
            alpha = sample_alpha(rng, pool=tuple(q for q in _ALPHA_POOL if q != p))
        n = rng.randrange(0, 40 * p)
        try:
            inst = make_instance(m, alpha, n)
        except ValueError:
            continue
        return inst, p


def beta_bounds_suite(cases: int = 200, seed: int = 2):
    """All scaling-ratio inequalities plus the correlation and envelope forms."""
    rng = random.Random(seed)
    records = []
    for klass in ("coprime", "dividing"):
        for _ in range(cases):
            inst, p = _good_prime_instance(rng, klass == "dividing")
            rep = check_beta_bounds(inst, p)
            records.append(
                {
                    "class": klass,
                    "p": p,
                    "m": inst.m,
                    "alpha": inst.alpha.alpha,
                    "n": inst.n,
                    "ok": rep.all_ok,
                    "failures": [e.label for e in rep.entries if not e.ok],
                }
            )
    # case-bound class: p coprime to everything, dividing some d_j
    for _ in range(cases):
        inst, p = _good_prime_instance(rng, False)
        scaled = rng.randrange(1, 5)
        d = tuple(p if i < scaled else 1 for i in range(4))
        val = local_density(inst, d, p, "explicit").value  # bounds asserted inside
        rec = {"class": "case-bounds", "p": p, "free": 4 - scaled, "value": val, "ok": True}
        if scaled == 4:
            want = Fraction(p) if inst.n % p == 0 else Fraction(0)
            rec["ok"] = val == want
        records.append(rec)
    # correlation bound (needs a prime shared between at least two coordinates)
    for _ in range(cases):
        inst, p = _good_prime_instance(rng, False)
        others = [
            x
            for x in (3, 5, 7, 11)
            if x != p and ((inst.m - 2) * (inst.m - 4) * inst.alpha.product) % x != 0
        ]
        if not others:
            continue
        q = rng.choice(others)
        d = [1, 1, 1, 1]
        for j in rng.sample(range(4), rng.randint(2, 4)):
            d[j] *= p
        j = rng.randrange(4)
        if d[j] % q:
            d[j] *= q
        d = tuple(d)
        g = g_correlation(inst, d)
        records.append(
            {"class": "correlation", "d": d, "g": g, "ok": g <= g_correlation_bound(d)}
        )
    # envelope
    for _ in range(cases // 2):
        inst, p = _good_prime_instance(rng, False)
        others = [
            x
            for x in (3, 5, 7)
            if x != p and ((inst.m - 2) * (inst.m - 4) * inst.alpha.product) % x != 0
        ]
        d = [1, 1, 1, 1]
        for prime in [p] + ([rng.choice(others)] if others else []):
            for j in rng.sample(range(4), rng.randint(0, 2)):
                if d[j] % prime:
                    d[j] *= prime
        records.append(
            {"class": "envelope", "d": tuple(d), "ok": beta_envelope_check(inst, tuple(d))}
        )
    # good-prime factor lower bound at p | h
    for _ in range(cases):
        inst, p = _good_prime_instance(rng, False)
        if inst.alpha.product % p == 0:
            continue
        gamma = gamma_quotient(inst, p)
        records.append(
            {
                "class": "gamma",
                "p": p,
                "v": valuation(inst.h, p),
                "gamma": gamma,
                "ok": gamma >= 1 - Fraction(1, p),
            }
        )
    ok = all(r["ok"] for r in records)
    return records, {"ok": ok, "cases": len(records)}


def _is_squarefree_small(n):
    for q in (2, 3, 5, 7, 11, 13):
        if n % (q * q) == 0:
            return False
    return True


def sandwich_suite(cases: int = 500, seed: int = 3):
    """Divisor-sum sandwich and the quadruple product inequality."""
    rng = random.Random(seed)
    pool = [p for p in primes_upto(60) if p > 2]
    records = []
    for _ in range(cases):
        k = rng.randint(0, 4)
        c = 1
        for q in rng.sample(pool, k):
            c *= q
        D = Fraction(rng.randint(2, 2000))
        beta = rng.choice((Fraction(1), Fraction(1), Fraction(3, 2), Fraction(2)))
        rec = weight_sandwich_check(c, D, beta)
        rec["D"], rec["beta"] = D, beta
        records.append(rec)
    for _ in range(cases):
        cs = []
        for _ in range(4):
            k = rng.randint(0, 3)
            c = 1
            for q in rng.sample(pool, k):
                c *= q
            cs.append(c)
        D = Fraction(rng.randint(2, 500))
        beta = rng.choice((Fraction(1), Fraction(3, 2)))
        rec = quadruple_sandwich_check(cs, D, beta)
        rec["D"], rec["beta"] = D, beta
        records.append(rec)
    ok = all(r["ok"] for r in records)
    return records, {"ok": ok, "cases": len(records)}


def decomposition_suite(n_max: int = 300, m: int = 5, alpha=(1, 1, 1, 1), slack: float = 1.2):
    """Count/main-term split: positivity, residual growth, and the trend check."""
    family = PolygonalFamily(m)
    vec = CoefficientVector(tuple(alpha))
    rows = decomposition_residual(family, vec, 0, n_max, digits=30)
    records = []
    all_r_pos = True
    all_ae_pos = True
    ratios = []
    for row in rows[1:]:
        all_r_pos &= row.r > 0
        all_ae_pos &= row.a_e > 0
        ratios.append((row.n, abs(row.residual) / row.h**0.75))
    half = n_max // 2
    c_bottom = max(v for n, v in ratios if n <= half)
    c_top = max(v for n, v in ratios if n > half)
    trend_ok = c_top <= slack * c_bottom
    floor_rows = [row for row in rows if row.h >= 1000]
    growth_floor = min((row.a_e / row.h**0.9 for row in floor_rows), default=1.0)
    records.append(
        {
            "n_max": n_max,
            "r_positive": all_r_pos,
            "a_e_positive": all_ae_pos,
            "fit_bottom": c_bottom,
            "fit_top": c_top,
            "trend_ok": trend_ok,
            "growth_floor": growth_floor,
        }
    )
    ok = all_r_pos and all_ae_pos and trend_ok and growth_floor > 0
    return records, {"ok": ok, "c_bottom": c_bottom, "c_top": c_top}


def theorem_gate_suite(theta=Fraction(1, 1978)):
    """Exact gate arithmetic and the s = 38 positivity margin."""
    gate = theta_gate(Fraction(theta))
    s38 = s_gate(38)
    boundary = theta_gate(Fraction(1, 1976))
    records = [
        {"check": "theta", **{k: v for k, v in gate.items()}},
        {"check": "boundary-1/1976", **{k: v for k, v in boundary.items()}},
        {"check": "s-gate", "s": 38, "margin": float(s38["margin"]), "ok": s38["ok"]},
    ]
    ok = gate["ok"] and s38["ok"] and not boundary["arithmetic_988"]
    return records, {"ok": ok}


SUITES = {
    "density-oracle": lambda cases, seed: density_oracle_suite(cases, seed),
    "beta-bounds": lambda cases, seed: beta_bounds_suite(cases, seed),
    "sandwich": lambda cases, seed: sandwich_suite(cases, seed),
    "decomposition": lambda cases, seed: decomposition_suite(n_max=max(cases, 50)),
    "theorem-gate": lambda cases, seed: theorem_gate_suite(),
}
