import math

import numpy as np
import pytest

from piltz.errors import DomainError
from piltz.meansquare import (euler_product, leading_denominator, mean_square_V, partial_series,
                              rankin_tail_bound, second_moment_cumulative, second_moment_integral,
                              series_constant)
from piltz.voronoi_contour import VoronoiParams, eval_V


def test_local_factor_coefficients():
    from piltz.meansquare import _local_coeffs
    assert _local_coeffs(3, 3) == [1, 9, 36, 100]
    assert _local_coeffs(4, 2) == [1, 16, 100]


def test_series_constants():
    c3, c4 = series_constant(3), series_constant(4)
    assert c3.exponent == 2 and c4.exponent == pytest.approx(7 / 4)
    assert c3.value > 0 and c3.tail_bound < 1e-8 * c3.value
    assert c4.value > 0 and c4.tail_bound < 1e-8 * c4.value
    # a coarser cutoff must agree within the bounds
    v, b = euler_product(3, 2.0, cutoff=10**5)
    assert abs(v - c3.value) <= b + c3.tail_bound


def test_partial_sums_within_rankin_tail(d3, d4):
    for table, X in ((d3, 10**6), (d4, 10**5)):
        c = series_constant(table.k).value
        part = partial_series(table, X)
        assert 0 < c - part <= rankin_tail_bound(table.k, X, float(series_constant(table.k).exponent))


def test_partial_sums_approach_constant(d3):
    c = series_constant(3).value
    gaps = [c - partial_series(d3, X) for X in (10**3, 10**4, 10**5, 10**6)]
    assert all(g > 0 for g in gaps) and gaps == sorted(gaps, reverse=True)


def test_mean_square_zero_and_small(d3):
    assert mean_square_V(3, 100.0, 0, d3).value == 0.0
    # brute trapezoid on a short range
    X, N = 60.0, 20
    xs = np.linspace(1, X, 20001)
    v = np.array([eval_V(VoronoiParams(3, x, N), d3) for x in xs])
    trap = float(np.sum((v[1:] ** 2 + v[:-1] ** 2) / 2 * np.diff(xs)))
    assert mean_square_V(3, X, N, d3).value == pytest.approx(trap, rel=1e-6)


def test_mean_square_k4_small(d4):
    X, N = 200.0, 30
    xs = np.linspace(1, X, 40001)
    v = np.array([eval_V(VoronoiParams(4, x, N), d4) for x in xs])
    trap = float(np.sum((v[1:] ** 2 + v[:-1] ** 2) / 2 * np.diff(xs)))
    assert mean_square_V(4, X, N, d4).value == pytest.approx(trap, rel=1e-6)


def test_mean_square_errors(d3):
    with pytest.raises(DomainError):
        mean_square_V(3, 1.5, 10, d3)
    with pytest.raises(DomainError):
        mean_square_V(4, 100, 10, d3)


def test_second_moment_small(d3):
    r = second_moment_integral(3, 2, d3)
    assert math.isfinite(r.residual) and r.lhs >= 0
    cum = second_moment_cumulative(d3, 5000)
    assert np.all(np.diff(cum) >= 0)


def test_second_moment_records(d3, d4):
    r = second_moment_integral(3, 10**5, d3)
    assert r.normalizer == pytest.approx((10**5) ** (17 / 6))
    assert abs(r.normalized_residual) < 1
    r4 = second_moment_integral(4, 10**4, d4)
    assert math.isfinite(r4.normalized_residual)


def test_constant_gap_is_one_over_192():
    c = series_constant(3).value / leading_denominator(3)
    from piltz.meansquare import second_moment_main
    assert second_moment_main(3, 1.0) - c == pytest.approx(1 / 192, abs=1e-15)
