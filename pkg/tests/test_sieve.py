import math
from fractions import Fraction

import pytest

from polyrep.core import CoefficientVector, PolygonalFamily, make_instance
from polyrep.enumeration import count_representations
from polyrep.errors import ConfigurationError, DispatchError
from polyrep.sieve import (
    SieveConfig,
    SieveWeightTable,
    beta_weighted_sums,
    capital_C,
    capital_lambda_minus,
    harmonic_H,
    kappa_constant,
    main_term_W,
    quadruple_sandwich_check,
    rosser_lambda,
    s_gate,
    sieve_count,
    theorem_driver,
    theta_gate,
    threshold_check,
    threshold_grid,
    weight_sandwich_check,
    weighted_sieve_sum,
)
from polyrep.eisenstein import beta_value


def test_rosser_lambda_spots():
    assert rosser_lambda(1, 100, 1, "+") == 1
    assert rosser_lambda(1, 100, 1, "-") == 1
    assert rosser_lambda(3, 100, 1, "+") == -1  # 3 < (100/3)
    assert rosser_lambda(15, 16, 1, "+") == 0  # 5 >= (16/5)
    assert rosser_lambda(3, 5, 2, "+") == 0  # 3^2 * 3 >= 5
    with pytest.raises(DispatchError):
        rosser_lambda(12, 100, 1, "+")
    with pytest.raises(DispatchError):
        rosser_lambda(6, 100, 1, "+")


def test_rosser_lower_singletons_unconditional():
    # the even-position chain is vacuous at a single prime
    for p in (3, 5, 97):
        assert rosser_lambda(p, 4, 1, "-") == -1


def test_capital_lambda_values():
    assert capital_lambda_minus(1, 100, 1) == 1
    assert capital_lambda_minus(35, 4, 1) == 0  # both weights vanish
    # both weights -1 realizes the value -1
    assert rosser_lambda(3, 10, 1, "+") == rosser_lambda(3, 10, 1, "-") == -1
    assert capital_lambda_minus(3, 10, 1) == -1


def test_capital_lambda_bound_sweep(rng):
    pool = (3, 5, 7, 11, 13)
    for _ in range(200):
        d = 1
        for p in rng.sample(pool, rng.randint(0, 4)):
            d *= p
        D = Fraction(rng.randint(2, 500))
        beta = rng.choice((Fraction(1), Fraction(3, 2), Fraction(2)))
        assert abs(capital_lambda_minus(d, D, beta)) <= 7


def test_weight_table_support_cap():
    # nonzero weights stay below D^((1+beta)/beta) over standard pools
    for D in (9, 25, 100):
        for beta in (Fraction(1), Fraction(2)):
            pool = tuple(p for p in (3, 5, 7, 11, 13) if p < D)
            for sign in ("+", "-"):
                table = SieveWeightTable(Fraction(D), beta, sign, pool)
                cap = Fraction(D) ** ((1 + beta) / beta)
                for d in table.support():
                    assert d < cap, (d, D, beta, sign)


def test_sandwich_spots():
    assert weight_sandwich_check(1, 10, 1) == {
        "c": 1,
        "lower": 1,
        "moebius": 1,
        "upper": 1,
        "ok": True,
    }
    rec = weight_sandwich_check(15, 100, 1)
    assert rec["ok"] and rec["lower"] <= 0 <= rec["upper"]


def test_sandwich_sweep(rng):
    pool = [3, 5, 7, 11, 13, 17, 19, 23, 29]
    for _ in range(150):
        c = 1
        for q in rng.sample(pool, rng.randint(0, 4)):
            c *= q
        D = Fraction(rng.randint(2, 1000))
        beta = rng.choice((Fraction(1), Fraction(3, 2), Fraction(2)))
        assert weight_sandwich_check(c, D, beta)["ok"]


def test_quadruple_sandwich_sweep(rng):
    pool = [3, 5, 7, 11, 13, 17]
    for _ in range(150):
        cs = []
        for _ in range(4):
            c = 1
            for q in rng.sample(pool, rng.randint(0, 3)):
                c *= q
            cs.append(c)
        D = Fraction(rng.randint(2, 300))
        assert quadruple_sandwich_check(cs, D, Fraction(1))["ok"]


def test_harmonic_weights():
    assert harmonic_H(1) == 1.0
    assert abs(harmonic_H(12) - (1 + 2**-0.5) * (1 + 3**-0.5)) < 1e-12
    assert abs(harmonic_H(7) - (1 + 7**-0.5)) < 1e-12
    with pytest.raises(ValueError):
        harmonic_H(0)


def test_capital_C_dyadic_value():
    # with unit coefficients the cap filter at 2 has measure (1/2)^4
    inst = make_instance(5, (1, 1, 1, 1), 10)
    assert capital_C(inst, 2, 1) == Fraction(1, 16)


def test_main_term_W_positive_sweep():
    for n in range(1, 101, 7):
        inst = make_instance(5, (1, 1, 1, 1), n)
        w = main_term_W(inst, 10.0)
        assert w > 0


def test_main_term_W_empty_pool():
    inst = make_instance(5, (1, 1, 1, 1), 10)
    assert main_term_W(inst, 3.0) == capital_C(inst, 2, 1) * (
        1 - beta_value(3, (1, 0, 0, 0), inst)
    ) or main_term_W(inst, 3.0) == capital_C(inst, 2, 1)


def test_one_minus_beta_in_unit_interval(rng):
    for _ in range(40):
        inst = make_instance(5, (1, 1, 1, 1), rng.randrange(1, 200))
        p = rng.choice((3, 5, 7, 11, 13))
        b = beta_value(p, (1, 0, 0, 0), inst)
        assert 0 < 1 - b <= 1


def test_beta_weighted_sums_hand_expansion():
    # pool {3}: sixteen terms expand by hand through the divisor-ratio branch
    inst = make_instance(5, (1, 1, 1, 1), 10)
    got_plus = beta_weighted_sums(inst, (3,), 10, 1, +1)
    got_minus = beta_weighted_sums(inst, (3,), 10, 1, -1)
    expected = Fraction(0)
    for bits in range(16):
        c = tuple((bits >> i) & 1 for i in range(4))
        expected += (-1) ** sum(c) * beta_value(3, c, inst)
    assert got_plus == expected == Fraction(5, 27)
    assert got_minus == expected  # Lambda^- = lambda^+ on this pool


def test_beta_weighted_sums_empty_pool():
    inst = make_instance(5, (1, 1, 1, 1), 10)
    assert beta_weighted_sums(inst, (), 10, 1, +1) == 1
    assert beta_weighted_sums(inst, (), 10, 1, -1) == 1


def test_m_minus_at_most_m_plus(rng):
    for _ in range(30):
        n = rng.randrange(1, 250)
        inst = make_instance(5, (1, 1, 1, 1), n)
        pool = rng.choice(((5,), (5, 7), (7, 11), (5, 7, 11)))
        D = Fraction(rng.randint(3, 200))
        m_minus = beta_weighted_sums(inst, pool, D, 1, -1)
        m_plus = beta_weighted_sums(inst, pool, D, 1, +1)
        assert m_minus <= m_plus


def test_weighted_sum_pool_empty_reduces_to_count():
    inst = make_instance(5, (1, 1, 1, 1), 60)
    caps = {2: 2}
    base = sieve_count(inst, caps=caps)
    assert weighted_sieve_sum(inst, caps=caps, pool=(), sign=-1) == base
    assert weighted_sieve_sum(inst, caps=caps, pool=(), sign=+1) == base


def test_weighted_sum_fubini_against_expansion():
    # pointwise-weight accumulation equals the expanded scaling-vector sum
    inst = make_instance(5, (1, 1, 1, 1), 30)
    caps = {2: 2}
    pool = (5,)
    D = Fraction(20)
    for sign in (-1, +1):
        pointwise = weighted_sieve_sum(
            inst, caps=caps, pool=pool, D=D, beta=1, sign=sign
        )
        total = 0
        from polyrep.sieve import SieveWeightTable

        plus = SieveWeightTable(D, Fraction(1), "+", pool)
        minus = SieveWeightTable(D, Fraction(1), "-", pool)
        first = (
            {d: 4 * minus[d] - 3 * plus[d] for d in plus.support()}
            if sign == -1
            else dict(plus.weights)
        )
        for d1, w1 in first.items():
            for d2, w2 in plus.weights.items():
                for d3, w3 in plus.weights.items():
                    for d4, w4 in plus.weights.items():
                        cnt = sieve_count(inst, (d1, d2, d3, d4), caps=caps)
                        total += w1 * w2 * w3 * w4 * cnt
        assert pointwise == total


def test_weighted_sum_brackets_truth(rng):
    for _ in range(10):
        n = rng.randrange(10, 300)
        inst = make_instance(5, (1, 1, 1, 1), n)
        pool = rng.choice(((5, 7), (5, 7, 11), (7, 11, 13)))
        D = Fraction(rng.randint(6, 150))
        caps = {2: rng.choice((1, 2, 3))}
        sols = count_representations(inst).solutions
        lower = weighted_sieve_sum(inst, caps=caps, pool=pool, D=D, sign=-1)
        upper = weighted_sieve_sum(inst, caps=caps, pool=pool, D=D, sign=+1)
        truth = sieve_count(inst, forbidden=set(pool), caps=caps, solutions=sols)
        assert lower <= truth <= upper


def test_weighted_sum_rejects_overlapping_pool():
    inst = make_instance(5, (1, 1, 1, 1), 10)
    with pytest.raises(ConfigurationError):
        weighted_sieve_sum(inst, caps={2: 1}, pool=(2, 5))


def test_main_mode_runs_and_matches_scale():
    inst = make_instance(5, (1, 1, 1, 1), 50)
    caps = {2: 2}
    main = weighted_sieve_sum(inst, caps=caps, pool=(5,), D=Fraction(20), mode="main", sign=+1)
    assert isinstance(main, Fraction)


def test_theta_gate_exact():
    assert theta_gate(Fraction(1, 1978))["ok"]
    assert theta_gate(Fraction(1, 1977) - Fraction(1, 10**6))["ok"]
    g = theta_gate(Fraction(1, 1977))
    assert g["arithmetic_988"] and not g["below_1_1977"] and not g["ok"]
    b = theta_gate(Fraction(1, 1976))
    assert b["boundary_1_1976"] and not b["arithmetic_988"]
    assert not theta_gate(Fraction(1, 988))["ok"]


def test_s_gate_positive_at_38():
    rec = s_gate(38)
    assert rec["ok"] and float(rec["margin"]) == pytest.approx(
        1 - math.exp(-1) * 1.083**10, rel=1e-12
    )
    assert not s_gate(34)["ok"]


def test_kappa_near_zeta4():
    import mpmath as mp

    with mp.workdps(30):
        k = kappa_constant(1e9, 1e6)
        assert k > mp.zeta(4)
        assert float(k) < 1.645


def test_threshold_exactness():
    # epsilon = 0, const = 1: passes exactly when h >= (2(m-2))^21 prod^6
    m, alpha = 3, (1, 1, 1, 1)
    bound = 2**21
    n_min = threshold_check(m, alpha, 0)["min_n"]
    h_min = 8 * (m - 2) * n_min + sum(alpha)
    assert h_min >= bound and 8 * (m - 2) * (n_min - 1) + 4 < bound
    assert threshold_check(m, alpha, n_min)["ok"]
    assert not threshold_check(m, alpha, n_min - 1)["ok"]


def test_threshold_fractional_epsilon():
    rec = threshold_check(5, (1, 1, 1, 1), 10**20, epsilon=Fraction(1, 20))
    assert isinstance(rec["ok"], bool)
    grid = threshold_grid((5, 11, 15), ((1, 1, 1, 1), (1, 1, 1, 3), (1, 3, 5, 7)))
    assert len(grid) == 9
    assert all(g["min_n"] > 0 for g in grid)


def test_driver_rejects_non_theorem_mode():
    fam = PolygonalFamily(7)
    cfg = SieveConfig()
    with pytest.raises(DispatchError, match="mod 3"):
        theorem_driver(fam, CoefficientVector((1, 1, 1, 1)), range(10, 12), cfg)


def test_driver_small_window():
    fam = PolygonalFamily(5)
    cfg = SieveConfig(theta=Fraction(1, 1978), factor_bound=3)
    report = theorem_driver(fam, CoefficientVector((1, 1, 1, 1)), range(500, 521), cfg)
    assert report.gates_ok
    assert report.coverage_fraction == 1.0
    assert float(report.kappa) > 1


def test_driver_monotone_in_bound():
    fam = PolygonalFamily(5)
    al = CoefficientVector((1, 1, 1, 1))
    covs = []
    for bound in (0, 1, 2):
        cfg = SieveConfig(factor_bound=bound)
        rep = theorem_driver(fam, al, range(200, 221), cfg)
        covs.append(rep.coverage_fraction)
    assert covs == sorted(covs)


def test_sieve_config_validation():
    with pytest.raises(ConfigurationError):
        SieveConfig(z0=2.0)
    with pytest.raises(ConfigurationError):
        SieveConfig(z0=50.0, z=10.0)
    assert SieveConfig().s0 > 1
