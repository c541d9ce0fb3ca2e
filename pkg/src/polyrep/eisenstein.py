"""Main-term Fourier coefficients from local densities, scaling ratios with
their inequality suite, and cusp-contribution bound evaluators.

The coefficient splits into an exact rational part and a single
transcendental prefactor, so equality-style tests compare Fractions and only
the final value touches floating point (mpmath, 50 digits by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from .arith import (
    divisors,
    euler_phi,
    factorize,
    kronecker,
    prime_divisors,
    valuation,
)
from .core import (
    ONES,
    CoefficientVector,
    PolygonalFamily,
    ProblemInstance,
    make_instance,
)
from .densities import (
    LocalDensity,
    density_oracle,
    local_density,
    reduce_scaling_at,
)
from .enumeration import count_range
from .errors import ConfigurationError, DispatchError, ObstructionError


@dataclass(frozen=True)
class QuadraticCharacter:
    """Real primitive character given by a fundamental discriminant."""

    disc: int

    def __call__(self, n: int) -> int:
        return kronecker(self.disc, n)

    @property
    def conductor(self) -> int:
        return abs(self.disc)


def lattice_character(alpha: CoefficientVector) -> QuadraticCharacter:
    """Character governing the unramified densities of the coset family.

    The diagonal discriminant is a square times prod(alpha), so the relevant
    character is the one attached to the field generated by sqrt(prod alpha);
    for prod(alpha) = 1 it is trivial.
    """
    q = alpha.product
    disc = q if q % 4 == 1 else 4 * q
    return QuadraticCharacter(disc)


@lru_cache(maxsize=64)
def _l_value_cached(disc: int, s: int, digits: int):
    with mp.workdps(digits + 10):
        if abs(disc) == 1:
            return +mp.zeta(s)
        q = abs(disc)
        total = mp.mpf(0)
        for a in range(1, q + 1):
            chi = kronecker(disc, a)
            if chi:
                total += chi * mp.zeta(s, mp.mpf(a) / q)
        return total / mp.mpf(q) ** s


def l_value(char: QuadraticCharacter, s: int = 2, digits: int = 50):
    """L(s, char) via Hurwitz zeta values at the conductor's residues."""
    return _l_value_cached(char.disc, s, digits)


def l_value_chi4(digits: int = 50):
    """L(2, chi) for the nontrivial character mod 4 (Catalan's constant)."""
    return l_value(QuadraticCharacter(-4), 2, digits)


def chi4(n: int) -> int:
    """The nontrivial character mod 4."""
    return kronecker(-4, n)


@dataclass(frozen=True)
class EisensteinCoefficient:
    """Main-term coefficient at one target, split rational x transcendental."""

    h: int
    d: tuple
    support: tuple
    rational_part: Fraction
    value: object  # mpf
    digits: int
    source: str
    obstruction: int | None = None
    densities: tuple = ()


@lru_cache(maxsize=200_000)
def _density_ordvec(m: int, alpha: tuple, n: int, p: int, c: tuple, source: str) -> Fraction:
    """Local density keyed by the ord_p vector of the scaling (the density
    only depends on d through it)."""
    inst = make_instance(m, alpha, n)
    d = tuple(p**e for e in c)
    if source == "oracle":
        return density_oracle(p, inst, d).value
    return local_density(inst, d, p, method="auto").value


def density_for(instance: ProblemInstance, d, p: int, source: str = "closed") -> Fraction:
    c = tuple(int(valuation(dj, p)) for dj in d)
    return _density_ordvec(instance.m, instance.alpha.alpha, instance.n, p, c, source)


def support_primes(instance: ProblemInstance, d=ONES) -> list[int]:
    """All primes dividing 2(m-2) prod(alpha_j d_j) h."""
    m = instance.m
    prod = instance.alpha.product
    for dj in d:
        prod *= dj
    return prime_divisors(2 * (m - 2) * prod * instance.h)


def transcendental_factor(alpha: CoefficientVector, digits: int = 50):
    """(2 pi)^2 / (sqrt(prod alpha) * L(2, psi)) with psi the lattice character."""
    psi = lattice_character(alpha)
    with mp.workdps(digits + 10):
        return (2 * mp.pi) ** 2 / (mp.sqrt(alpha.product) * l_value(psi, 2, digits))


def eisenstein_rational(
    instance: ProblemInstance, d=ONES, source: str = "closed", extra_primes=()
):
    """Exact rational part: h * prod_p b_p / (1 - psi(p) p^-2) over the support,
    divided by 64 (m-2)^4 prod(d).  Returns (Fraction, support, obstruction)."""
    m = instance.m
    psi = lattice_character(instance.alpha)
    support = sorted(set(support_primes(instance, d)) | set(extra_primes))
    prod_d = 1
    for dj in d:
        prod_d *= dj
    rational = Fraction(instance.h, 64 * (m - 2) ** 4 * prod_d)
    dens = []
    for p in support:
        bp = density_for(instance, d, p, source)
        dens.append((p, bp))
        if bp == 0:
            return Fraction(0), tuple(support), p, tuple(dens)
        rational *= bp / (1 - Fraction(psi(p), p * p))
    return rational, tuple(support), None, tuple(dens)


def assemble_eisenstein(
    instance: ProblemInstance,
    d=ONES,
    source: str = "closed",
    digits: int = 50,
    extra_primes=(),
) -> EisensteinCoefficient:
    """Main-term coefficient at the instance's target for the d-scaled coset."""
    if instance.m % 2 == 0:
        raise DispatchError("the main-term assembly requires odd m")
    rational, support, obstruction, dens = eisenstein_rational(
        instance, d, source, extra_primes
    )
    with mp.workdps(digits + 10):
        if obstruction is not None:
            value = mp.mpf(0)
        else:
            value = (
                mp.mpf(rational.numerator)
                / rational.denominator
                * transcendental_factor(instance.alpha, digits)
            )
    return EisensteinCoefficient(
        h=instance.h,
        d=tuple(d),
        support=support,
        rational_part=rational,
        value=value,
        digits=digits,
        source=source,
        obstruction=obstruction,
        densities=dens,
    )


def gamma_p_case(p: int, v: int, psi_p: int, cp_unit: bool = True) -> Fraction:
    """Degree-2 local factor at a good prime, literal case formulas.

    Only the two branches with psi(p) != 0 are expressible without extra
    local data; the remaining branch is obtained from the density quotient
    (gamma_quotient).  v is the valuation of the target at p.
    """
    if psi_p == 0:
        raise DispatchError(
            "the psi(p) = 0 branch has no closed form here; use gamma_quotient"
        )
    x = -Fraction(1, p)
    if cp_unit:
        return (1 - x ** (v + 1)) / (1 + Fraction(1, p))
    num = 1 - x ** (v + 2) + (1 - x**v)
    return num / ((1 + Fraction(1, p * p)) * (1 + Fraction(1, p)))


def gamma_quotient(instance: ProblemInstance, p: int, d=ONES) -> Fraction:
    """b_p / (1 - psi(p) p^-2): the good-prime factor by the quotient identity."""
    if p == 2:
        raise DispatchError("good-prime factors are defined at odd primes only")
    psi = lattice_character(instance.alpha)
    bp = density_for(instance, d, p, "closed")
    denom = 1 - Fraction(psi(p), p * p)
    return bp / denom


@dataclass(frozen=True)
class BetaRatio:
    p: int
    c: tuple
    value: Fraction


def beta_ratio(p: int, c, instance: ProblemInstance) -> BetaRatio:
    """Scaling ratio at p for exponent vector c.

    Equals (density at scaling p^c) / (p^{sum c} * density at scaling 1); the
    good-prime normalization by (1 - psi(p) p^-2) * gamma_p cancels to exactly
    this via the quotient identity, and at p | m-2 it is the defining ratio.
    """
    if p == 2:
        raise DispatchError("scaling ratios are defined at odd primes only")
    c = tuple(int(e) for e in c)
    b1 = density_for(instance, ONES, p, "closed")
    if b1 == 0:
        raise ObstructionError(p, "unit-scaling density vanishes")
    if c == (0, 0, 0, 0):
        return BetaRatio(p, c, Fraction(1))
    bc = density_for(instance, tuple(p**e for e in c), p, "closed")
    val = bc / (Fraction(p) ** sum(c) * b1)
    return BetaRatio(p, c, val)


def beta_value(p: int, c, instance: ProblemInstance) -> Fraction:
    return beta_ratio(p, c, instance).value


def beta_product(instance: ProblemInstance, d) -> Fraction:
    """prod over odd p | d of beta at the ord_p exponent vector of d."""
    prod_d = 1
    for dj in d:
        prod_d *= dj
    out = Fraction(1)
    for p in prime_divisors(prod_d):
        if p == 2:
            raise DispatchError("scaling vectors here must be odd")
        c = tuple(int(valuation(dj, p)) for dj in d)
        out *= beta_value(p, c, instance)
    return out


_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def _unit_vecs():
    return [tuple(1 if k == j else 0 for k in range(4)) for j in range(4)]


@dataclass
class BoundEntry:
    label: str
    value: Fraction
    bound: Fraction
    ok: bool


@dataclass
class BoundReport:
    p: int
    klass: str
    entries: list = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(e.ok for e in self.entries)


def check_beta_bounds(instance: ProblemInstance, p: int) -> BoundReport:
    """Evaluate every scaling-ratio inequality available at p.

    Two hypothesis classes: p coprime to everything (2/p, 4/p^2, 8/p^3 and the
    split quartic case) and p >= 5 dividing prod(alpha) (4/p, 16/p^2, 64/p^3,
    256/p^4 with the sharper rational variants).  The good-prime factor lower
    bound 1 - 1/p is checked in both.
    """
    m = instance.m
    if p % 2 == 0 or ((m - 2) * (m - 4)) % p == 0:
        raise DispatchError(f"p={p} is outside both bound classes for m={m}")
    divides_alpha = instance.alpha.product % p == 0
    if divides_alpha and p < 5:
        raise DispatchError("the dividing-coefficients class needs p >= 5")
    report = BoundReport(p, "dividing" if divides_alpha else "coprime")
    n_in_pz = instance.n % p == 0

    def add(label, value, bound):
        report.entries.append(BoundEntry(label, value, bound, value <= bound))

    singles = [beta_value(p, c, instance) for c in _unit_vecs()]
    pairs = [
        beta_value(p, tuple(1 if k in (i, j) else 0 for k in range(4)), instance)
        for i, j in _PAIRS
    ]
    triples = [
        beta_value(p, tuple(0 if k == j else 1 for k in range(4)), instance)
        for j in range(4)
    ]
    quad = beta_value(p, (1, 1, 1, 1), instance)

    if not divides_alpha:
        for j, v in enumerate(singles):
            add(f"single[{j}]", v, Fraction(2, p))
        for (i, j), v in zip(_PAIRS, pairs):
            add(f"pair[{i}{j}]", v, Fraction(4, p * p))
        for j, v in enumerate(triples):
            add(f"triple[-{j}]", v, Fraction(8, p**3))
        qbound = Fraction(1, p * p * (p - 1)) if n_in_pz else Fraction(16, p**4)
        add("quad", quad, qbound)
    else:
        add("single.max", max(singles), Fraction(4, p))
        sharp_pair = Fraction(2 * p, (p - 1) ** 2 * (p + 1))
        add("pair.max(sharp)", max(pairs), sharp_pair)
        add("pair.max", max(pairs), Fraction(16, p * p))
        sharp_tri = Fraction(2, (p - 1) ** 2 * (p + 1))
        add("triple.max(sharp)", max(triples), sharp_tri)
        add("triple.max", max(triples), Fraction(64, p**3))
        qbound = (
            Fraction(1, (p - 1) ** 2 * (p + 1)) if n_in_pz else Fraction(256, p**4)
        )
        add("quad", quad, qbound)

    gamma = gamma_quotient(instance, p)
    report.entries.append(
        BoundEntry("gamma >= 1 - 1/p", gamma, Fraction(p - 1, p), gamma >= Fraction(p - 1, p))
    )
    return report


def envelope_weight_4th(p: int, n: int) -> Fraction:
    """(w(p)/p)^4: fourth power of the per-prime envelope weight."""
    base = Fraction(16, p**4)
    if n % p == 0:
        return max(Fraction(1, p * p * (p - 1)), base)
    return base


def beta_envelope_check(instance: ProblemInstance, d) -> bool:
    """prod beta <= prod_j w(d_j)/d_j for squarefree odd d at coprime-class
    primes; compared in fourth powers to stay rational."""
    lhs = beta_product(instance, d) ** 4
    rhs = Fraction(1)
    prod_d = 1
    for dj in d:
        prod_d *= dj
    for p in prime_divisors(prod_d):
        k = sum(1 for dj in d if dj % p == 0)
        rhs *= envelope_weight_4th(p, instance.n) ** k
    return lhs <= rhs


def g_correlation(instance: ProblemInstance, d) -> Fraction:
    """Cross-coordinate correlation of the scaling ratios.

    Product over primes dividing at least two coordinates of
    beta(joint exponents) / prod_j beta(exponent in slot j alone); primes
    dividing a single coordinate cancel exactly and are skipped.
    """
    out = Fraction(1)
    prod_d = 1
    for dj in d:
        prod_d *= dj
    for p in prime_divisors(prod_d):
        cvec = tuple(int(valuation(dj, p)) for dj in d)
        if sum(1 for e in cvec if e) < 2:
            continue
        num = beta_value(p, cvec, instance)
        den = Fraction(1)
        for j, e in enumerate(cvec):
            if e:
                den *= beta_value(
                    p, tuple(e if k == j else 0 for k in range(4)), instance
                )
        if den == 0:
            raise ObstructionError(p, "slotwise ratio vanishes in correlation")
        out *= num / den
    return out


def g_correlation_bound(d) -> Fraction:
    """4^4 * prod_{i<j} gcd(d_i, d_j)^2."""
    out = Fraction(256)
    for i, j in _PAIRS:
        out *= math.gcd(d[i], d[j]) ** 2
    return out


# ---------------------------------------------------------------------------
# cusp bounds and decomposition residuals


def cusp_bound(
    instance: ProblemInstance,
    d=ONES,
    profile: str = "simplified",
    epsilon: float = 0.05,
    constants: dict | None = None,
    digits: int = 50,
    target_index: int | None = None,
):
    """Upper-bound evaluator for the residual (cuspidal) coefficient.

    simplified: C * M^(11/2+eps) * N^(5/2+eps) * t^(1/2+eps) with M = 2(m-2),
    N the form level and t the Fourier index (defaults to h).
    explicit: the full displayed product; all analytic constants must be
    supplied via `constants` (delta, c_delta, C_eps, delta_level, Delta_alpha).
    """
    from .core import level_of_form

    m = instance.m
    M = 2 * (m - 2)
    N = level_of_form(instance.family, instance.alpha, d)
    t = instance.h if target_index is None else target_index
    constants = dict(constants or {})
    with mp.workdps(digits + 10):
        if profile == "simplified":
            C = mp.mpf(constants.get("C", 1))
            return (
                C
                * mp.mpf(M) ** (mp.mpf(11) / 2 + epsilon)
                * mp.mpf(N) ** (mp.mpf(5) / 2 + epsilon)
                * mp.mpf(t) ** (mp.mpf(1) / 2 + epsilon)
            )
        if profile != "explicit":
            raise ConfigurationError(f"unknown cusp-bound profile {profile!r}")
        missing = [
            k
            for k in ("delta", "c_delta", "C_eps", "delta_level", "Delta_alpha")
            if k not in constants
        ]
        if missing:
            raise ConfigurationError(
                "explicit cusp profile needs constants: " + ", ".join(missing)
            )
        delta = mp.mpf(constants["delta"])
        c_delta = mp.mpf(constants["c_delta"])
        C_eps = mp.mpf(constants["C_eps"])
        dlev = mp.mpf(constants["delta_level"])  # the level-indexed constant
        Delta_alpha = mp.mpf(constants["Delta_alpha"])
        M2N = M * M * N
        front = 54 / (mp.pi**2 * dlev ** mp.mpf(1.5))
        mid = (
            mp.mpf(M) ** 2
            * mp.mpf(N) ** (2 + 2 * delta)
            * mp.sqrt(2 * mp.pi / 3)
            * mp.e ** (2 * mp.pi)
            * mp.sqrt(mp.zeta(1 + 4 * delta))
            * c_delta ** mp.mpf(2.5)
            * euler_phi(M)
        )
        den = mp.mpf(1)
        for p in prime_divisors(M):
            if N % p != 0:
                den *= mp.sqrt(1 - mp.mpf(1) / p**2)
        for p in prime_divisors(N):
            den *= mp.sqrt(1 - mp.mpf(1) / p)
        dsum = Fraction(0)
        for dd in divisors(M2N):
            dsum += Fraction(
                euler_phi(M2N // dd) * euler_phi(dd) * (M2N // dd) * math.gcd(M * M, dd) ** 4,
                (M * M) ** 4,
            )
        tail = mp.sqrt(mp.mpf(dsum.numerator) / dsum.denominator) * mp.sqrt(
            (27 / Delta_alpha) * (M2N / (mp.pi * dlev)) + 16
        )
        return (
            front
            * mid
            / den
            * C_eps
            * mp.mpf(t) ** (mp.mpf(1) / 2 + epsilon)
            * tail
        )


@dataclass(frozen=True)
class ResidualRow:
    n: int
    h: int
    r: int
    a_e: float
    residual: float


def decomposition_residual(
    family: PolygonalFamily,
    alpha: CoefficientVector,
    n_lo: int,
    n_hi: int,
    d=ONES,
    digits: int = 50,
) -> list[ResidualRow]:
    """Per-target table (n, h, count, main term, count - main term)."""
    counts = count_range(family, alpha, n_hi, d)
    factor = transcendental_factor(alpha, digits)
    rows = []
    for n in range(n_lo, n_hi + 1):
        inst = ProblemInstance(family, alpha, n)
        rational, _, obstruction, _ = eisenstein_rational(inst, d, "closed")
        with mp.workdps(digits + 10):
            a_e = float(mp.mpf(rational.numerator) / rational.denominator * factor)
        r = int(counts[n])
        rows.append(ResidualRow(n, inst.h, r, a_e, r - a_e))
    return rows
