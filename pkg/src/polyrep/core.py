"""Polygonal-number arithmetic and the completed-square lattice cosets.

Everything here is arbitrary-precision integer arithmetic; types are frozen
and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import lcm_all, valuation
from .errors import DispatchError

ONES = (1, 1, 1, 1)


def eval_polygonal(m: int, x: int) -> int:
    """The x-th generalized m-gonal number ((m-2)x^2 - (m-4)x) / 2."""
    if m < 3:
        raise ValueError(f"polygon order must be >= 3, got {m}")
    num = (m - 2) * x * x - (m - 4) * x
    assert num % 2 == 0
    return num // 2


def shifted_square_coordinate(m: int, d_j: int, x: int) -> int:
    """Completed-square coordinate 2(m-2) d_j x + 4 - m."""
    return 2 * (m - 2) * d_j * x + 4 - m


def target_h(m: int, alpha, n: int) -> int:
    """Transformed target 8(m-2) n + sum_j alpha_j (m-4)^2."""
    if n < 0:
        raise ValueError("target n must be nonnegative")
    return 8 * (m - 2) * n + sum(a * (m - 4) ** 2 for a in alpha)


@dataclass(frozen=True)
class PolygonalFamily:
    """One polygon order m >= 3."""

    m: int

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"polygon order must be >= 3, got {self.m}")

    @property
    def theorem_mode(self) -> bool:
        """Whether the almost-prime driver accepts this order.

        Requires m odd with m - 4 divisible by neither 3 nor 5; outside this
        regime the set of representable targets with restricted coordinates
        degenerates (n forced into fixed residue classes mod 3 or mod 5).
        """
        m = self.m
        return m % 2 == 1 and (m - 4) % 3 != 0 and (m - 4) % 5 != 0

    def value(self, x: int) -> int:
        return eval_polygonal(self.m, x)


@dataclass(frozen=True)
class CoefficientVector:
    """Four positive coefficients whose product is odd and squarefree."""

    alpha: tuple[int, int, int, int]

    def __post_init__(self):
        a = self.alpha
        if len(a) != 4 or any(x < 1 for x in a):
            raise ValueError("need four positive coefficients")
        prod = a[0] * a[1] * a[2] * a[3]
        if prod % 2 == 0:
            raise ValueError(f"coefficient product must be odd, got {a}")
        p = 3
        rem = prod
        while p * p <= rem:
            if rem % (p * p) == 0:
                raise ValueError(
                    f"coefficient product must be squarefree, got {a} "
                    f"(divisible by {p}^2)"
                )
            while rem % p == 0:
                rem //= p
            p += 2
        object.__setattr__(self, "alpha", tuple(a))

    @property
    def product(self) -> int:
        a = self.alpha
        return a[0] * a[1] * a[2] * a[3]

    def __iter__(self):
        return iter(self.alpha)

    def __getitem__(self, i):
        return self.alpha[i]


@dataclass(frozen=True)
class ProblemInstance:
    """One Diophantine problem: represent n by sum_j alpha_j p_m(x_j)."""

    family: PolygonalFamily
    alpha: CoefficientVector
    n: int
    h: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("target n must be nonnegative")
        h = target_h(self.family.m, self.alpha.alpha, self.n)
        if h <= 0:
            raise ValueError("transformed target h must be positive")
        object.__setattr__(self, "h", h)

    @property
    def m(self) -> int:
        return self.family.m


def make_instance(m: int, alpha, n: int) -> ProblemInstance:
    return ProblemInstance(PolygonalFamily(m), CoefficientVector(tuple(alpha)), n)


@dataclass(frozen=True)
class LatticeCoset:
    """Diagonal lattice scaled by d, shifted by (4-m)/(2(m-2)) per coordinate."""

    family: PolygonalFamily
    alpha: CoefficientVector
    d: tuple[int, int, int, int]
    gram_diag: tuple[int, int, int, int] = ()
    shift_num: int = 0
    shift_den: int = 1

    def __post_init__(self):
        m = self.family.m
        if len(self.d) != 4 or any(dj <= 0 for dj in self.d):
            raise ValueError(f"scaling vector entries must be >= 1, got {self.d}")
        gram = tuple(
            4 * (m - 2) ** 2 * a * dj * dj for a, dj in zip(self.alpha, self.d)
        )
        object.__setattr__(self, "gram_diag", gram)
        object.__setattr__(self, "shift_num", 4 - m)
        object.__setattr__(self, "shift_den", 2 * (m - 2))

    @property
    def discriminant(self) -> int:
        g = self.gram_diag
        return g[0] * g[1] * g[2] * g[3]

    @property
    def shift(self) -> Fraction:
        return Fraction(self.shift_num, self.shift_den)

    @property
    def conductor(self) -> int:
        """Smallest a with a * shift integral (relative to the unscaled lattice)."""
        return self.shift_den // math.gcd(self.shift_num, self.shift_den)

    def q_value(self, x) -> int:
        """Quadratic form on the coset point with integer coordinates x."""
        m = self.family.m
        return sum(
            a * shifted_square_coordinate(m, dj, xj) ** 2
            for a, dj, xj in zip(self.alpha, self.d, x)
        )


def build_coset(family: PolygonalFamily, alpha: CoefficientVector, d=ONES) -> LatticeCoset:
    return LatticeCoset(family, alpha, tuple(d))


def level_of_diagonal_form(diag) -> int:
    """Level of the form sum_j g_j x_j^2: the least N with N * A^{-1} integral
    with even diagonal, where A = 2 * diag(g)."""
    if any(g <= 0 for g in diag):
        raise ValueError("diagonal entries must be positive")
    return lcm_all(4 * g for g in diag)


def level_of_form(family: PolygonalFamily, alpha: CoefficientVector, d=ONES) -> int:
    """Level of the quadratic part sum_j alpha_j (2(m-2) d_j x_j)^2."""
    coset = build_coset(family, alpha, d)
    return level_of_diagonal_form(coset.gram_diag)


def require_theorem_mode(family: PolygonalFamily) -> None:
    """Reject polygon orders outside the almost-prime regime with a diagnostic."""
    if not family.theorem_mode:
        m = family.m
        reasons = []
        if m % 2 == 0:
            reasons.append("m is even")
        if (m - 4) % 3 == 0:
            reasons.append(
                "m - 4 is divisible by 3 (coordinates coprime to 3 force the "
                "target into a fixed residue class mod 3)"
            )
        if (m - 4) % 5 == 0:
            reasons.append(
                "m - 4 is divisible by 5 (coordinates coprime to 5 force the "
                "target into a fixed residue class mod 5)"
            )
        raise DispatchError(
            f"polygon order m={m} is outside the almost-prime regime: "
            + "; ".join(reasons)
        )


def coordinate_scale(m: int, d_j: int) -> tuple[int, int]:
    """Linear map x -> a x + b carrying coordinate x to its completed square root."""
    return 2 * (m - 2) * d_j, 4 - m


def valuation_vector(values, p: int) -> list:
    return [valuation(v, p) for v in values]
