import math
from fractions import Fraction as F

import numpy as np
import pytest

from piltz.divisor_core import build_divisor_table
from piltz.errors import DomainError
from piltz.exponent_pairs import (K0, K1, K4, K5, TRIVIAL, Strategy, StrategySet, bourgain_strategies,
                                  exp_sum_probe, hypothesis_strategies, kl_properties_check,
                                  large_sieve_exponent, lemma6_hypothesis_check, merged_bound,
                                  minimax_critical_exponent, minimax_grid, pair, pair_database,
                                  parse_word, process_A, process_B, reduce_word, sum_S3_direct,
                                  sum_S4_direct, theta4, trudgian_yang_strategies, type1_exponent,
                                  type1_first_use_exponent, vinogradov_bound)
from piltz.voronoi_contour import VoronoiParams, eval_V


def test_processes():
    assert process_A(TRIVIAL).core == (0, 1)
    p = pair("3/17", "5/7")
    assert process_B(process_B(p)).core == p.core
    assert process_A(pair(F(1, 2), F(1, 2))).core == (F(1, 6), F(2, 3))


def test_words():
    assert reduce_word("A3BA2B", TRIVIAL).core == (F(1, 42), F(25, 28))
    assert reduce_word("", TRIVIAL).core == (0, 1)
    assert reduce_word("A", K0).core == (F(13, 194), F(76, 97))
    assert parse_word("A3BA2B") == list("AAABAAB")
    for bad in ("A0", "C", "AB-", "3A"):
        with pytest.raises(DomainError):
            parse_word(bad)


def test_rejects_floats_and_out_of_range():
    with pytest.raises(DomainError):
        pair(0.1, 0.9)
    with pytest.raises(DomainError):
        pair("3/4", "1")


def test_database():
    db = pair_database()
    assert process_A(db["k1"]).core == (F(2371, 43205), F(280013, 345640))
    assert db["k0"].core == (F(13, 84), F(55, 84)) and db["k0"].eps_flag
    for p in db.values():
        assert 0 <= p.kappa <= F(1, 2) <= p.lam <= 1


def test_theta4():
    assert theta4(F(13, 84)) == F(443, 388) == F(9, 8) + F(13, 776)
    assert theta4(0) == F(9, 8)
    assert theta4(F(1, 2)) == F(7, 6)
    with pytest.raises(DomainError):
        theta4(F(3, 4))


def test_kl_properties():
    for seed in (K0, pair(0, F(1, 2)), pair(F(1, 2), 1), pair(F(1, 10), F(3, 5))):
        r = kl_properties_check(process_A(seed))
        assert r.two_q_minus_p == F(3, 2) and r.p_plus_q <= 1
    with pytest.raises(DomainError):
        kl_properties_check(process_A(K1))  # k1 is not on lambda = kappa + 1/2


def test_strategy_exponents():
    p = pair(F(1, 42), F(25, 28))
    assert type1_exponent(p, 0, 0) == F(1, 168)
    assert large_sieve_exponent(pair(0, F(1, 2)), 0, 0) == 0
    for a in (F(1, 10), F(1, 3), F(1, 2)):
        assert type1_exponent(K0, a, a / 2) == type1_first_use_exponent(K0, a)
    with pytest.raises(DomainError):
        type1_exponent(K0, F(1, 2), F(1, 100))


def test_minimax_bourgain():
    r = minimax_critical_exponent(bourgain_strategies())
    assert r.value == F(13, 776)
    assert r.theta == F(443, 388)


def test_minimax_trudgian_yang():
    r = minimax_critical_exponent(trudgian_yang_strategies())
    assert r.value == F(2471, 147580)
    assert r.a == F(13689, 73790)
    assert 2 * r.m == r.a * (1 - F(1, 1521))
    # all three lower-region options tie at the critical point
    assert set(r.per_strategy.values()) == {F(2471, 147580)}


def test_minimax_hypothesis():
    assert minimax_critical_exponent(hypothesis_strategies()).value == 0


def test_minimax_grid_agrees():
    for s in (bourgain_strategies(), trudgian_yang_strategies()):
        exact = minimax_critical_exponent(s)
        val, a, m = minimax_grid(s)
        assert abs(val - float(exact.value)) <= 1e-8


def test_minimax_against_linprog():
    scipy = pytest.importorskip("scipy.optimize")
    # lower Trudgian-Yang region as an LP per branch choice of the two lemma7 maxima
    s = trudgian_yang_strategies()
    best = -1.0
    for c1 in (0, 1):
        for c2 in (0, 1):
            A_ub, b_ub = [], []
            for strat, choice in zip(s.lower, (0, c1, c2)):
                br = strat.branches()
                f = br[choice]
                A_ub.append([-float(f[1]), -float(f[2]), 1.0]); b_ub.append(float(f[0]))
                for j, g in enumerate(br):
                    if j != choice:
                        A_ub.append([float(g[1] - f[1]), float(g[2] - f[2]), 0.0]); b_ub.append(float(f[0] - g[0]))
            A_ub += [[0.25, -1, 0], [-1, 1, 0], [-0.5, 1, 0]]
            b_ub += [0, 0, 0]
            r = scipy.linprog([0, 0, -1], A_ub=A_ub, b_ub=b_ub, bounds=[(0, 0.5), (0, 0.5), (None, None)],
                              method="highs")
            if r.status == 0:
                best = max(best, -r.fun)
    assert best == pytest.approx(2471 / 147580, abs=1e-10)


def test_strategy_validation():
    with pytest.raises(DomainError):
        Strategy("type2", K0)
    with pytest.raises(DomainError):
        StrategySet((), (Strategy("type1", K0),))


def test_vinogradov_and_merged():
    assert merged_bound(1, 10) == 1
    assert vinogradov_bound(2, 16, 1.5) == pytest.approx(3 * math.exp(-2 ** -18 * math.log(2) ** 3 / math.log(16) ** 2))
    for M0, x in [(10, 1e3), (1e5, 1e6), (3, 4)]:
        assert merged_bound(M0, x) >= M0 ** (1 - 2 ** -21)
    with pytest.raises(DomainError):
        vinogradov_bound(2, 8, 1.5)
    with pytest.raises(DomainError):
        merged_bound(10, 5)


def test_vinogradov_hypothesis_check():
    r = lemma6_hypothesis_check()
    assert r.ok and r.worst_lower > 0 and r.worst_upper > 0
    assert not lemma6_hypothesis_check(alpha=1).ok


def test_direct_sums(d3, d4):
    x, N = 12345.6, 500
    s3 = sum_S3_direct(x, N, d3)
    assert s3 * x / (2 * math.pi ** 2 * math.sqrt(3)) == pytest.approx(eval_V(VoronoiParams(3, x, N), d3), rel=1e-13)
    s4 = sum_S4_direct(x, N, d4)
    assert s4 * x ** 1.125 / (4 * math.pi ** 2) == pytest.approx(eval_V(VoronoiParams(4, x, N), d4), rel=1e-13)


def test_S3_bound(d3):
    x = N = 10**6
    s3 = sum_S3_direct(x, N, d3)
    assert abs(s3) <= 1.0 * math.log(x) ** (2 / 3) * math.log(N) ** 2


def test_exp_sum_probe():
    assert exp_sum_probe(10**6, 1, 1, 1) == pytest.approx(1.0)
    x, n1, n2, M = 1e6, 2, 3, 500
    direct = abs(sum(np.exp(2j * math.pi * 3 * (x * n1 * n2 * n) ** (1 / 3)) for n in range(M + 1, 2 * M + 1)))
    assert exp_sum_probe(x, n1, n2, M) == pytest.approx(direct, rel=1e-6)
    assert exp_sum_probe(x, n1, n2, M) <= M
