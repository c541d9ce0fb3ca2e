"""Exact integer/rational helpers: primes, factorization, valuations, symbols."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import lru_cache

INF = math.inf

_sieve_cache: list[int] = []
_sieve_limit = 0


def primes_upto(n: int) -> list[int]:
    """All primes <= n, cached and extended on demand."""
    global _sieve_cache, _sieve_limit
    if n > _sieve_limit:
        limit = max(n, 2 * _sieve_limit, 1 << 10)
        mark = bytearray([1]) * (limit + 1)
        mark[0:2] = b"\x00\x00"
        for p in range(2, math.isqrt(limit) + 1):
            if mark[p]:
                mark[p * p :: p] = bytearray(len(mark[p * p :: p]))
        _sieve_cache = [i for i in range(limit + 1) if mark[i]]
        _sieve_limit = limit
    return [p for p in _sieve_cache if p <= n]


def _miller_rabin(n: int, bases) -> bool:
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in bases:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n < 37 * 37:
        return True
    # deterministic for n < 3.3e24
    return _miller_rabin(n, (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37))


def _pollard_rho(n: int, rng: random.Random) -> int:
    while True:
        c = rng.randrange(1, n)
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {p: exponent}; 0 and +-1 give {}."""
    n = abs(n)
    if n <= 1:
        return {}
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    if n < 47 * 47 or is_prime(n):
        out[n] = out.get(n, 0) + 1
        return out
    # trial division up to a modest bound, Pollard rho for the rest
    f = 49
    while f * f <= n and f < 1 << 16:
        if n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
            if n == 1:
                return out
            if is_prime(n):
                out[n] = out.get(n, 0) + 1
                return out
        else:
            f += 2
    rng = random.Random(0xFEED ^ n)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.append(d)
        stack.append(m // d)
    return out


def prime_divisors(n: int) -> list[int]:
    return sorted(factorize(n))


def valuation(n: int, p: int):
    """ord_p(n); valuation(0, p) is +inf."""
    if n == 0:
        return INF
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def frac_valuation(q: Fraction, p: int):
    if q == 0:
        return INF
    return valuation(q.numerator, p) - valuation(q.denominator, p)


def frac_unit(q: Fraction, p: int) -> Fraction:
    """q / p^{ord_p q} for nonzero q; a p-adic unit as a reduced fraction."""
    if q == 0:
        raise ValueError("zero has no unit part")
    v = frac_valuation(q, p)
    return q / Fraction(p) ** v


def legendre(a, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p; accepts Fraction units."""
    if isinstance(a, Fraction):
        return legendre(a.numerator, p) * legendre(a.denominator, p)
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the full extension of the Jacobi symbol."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    if e:
        if a % 2 == 0:
            return 0
        if e % 2 == 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    return all(e == 1 for e in factorize(n).values())


def moebius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def squarefree_divisors(n: int) -> list[int]:
    out = [1]
    for p in factorize(n):
        out = out + [d * p for d in out]
    return sorted(out)


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def big_omega(n: int) -> int:
    """Number of prime factors of |n| with multiplicity (1 -> 0)."""
    return sum(factorize(n).values())


def little_omega(n: int) -> int:
    """Number of distinct prime factors of |n|."""
    return len(factorize(n))


def lcm_all(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v)
    return out


@lru_cache(maxsize=None)
def smallest_prime_factors(limit: int):
    """Array spf[i] = smallest prime factor of i, for fast batch factoring."""
    spf = list(range(limit + 1))
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == p:
            for m in range(p * p, limit + 1, p):
                if spf[m] == m:
                    spf[m] = p
    return spf


def factorize_with_table(n: int, spf) -> dict[int, int]:
    out: dict[int, int] = {}
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out[p] = e
    return out
