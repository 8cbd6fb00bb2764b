import math

import numpy as np
import pytest

from piltz import voronoi_contour as vc
from piltz.divisor_core import build_divisor_table, main_term
from piltz.errors import ConvergenceError, DomainError, PoleError
from piltz.voronoi_contour import (ContourSpec, K_asymptotic, R_minus1_eval, R_minus1_oracle,
                                   VoronoiParams, eval_V, integral_delta_voronoi, lemma5_check,
                                   lemma5_series, lemma5_T, line_integral, perron_line_integral,
                                   residue_check, root_fraction, theorem2_rhs, thm2_residual)

P3_0 = 0.4863343131695876


def test_params_validation():
    assert VoronoiParams(3, 10, 2).delta == pytest.approx(1 / 6)
    assert VoronoiParams(4, 10, 2).delta == 0.05
    for bad in [dict(k=2, x=10, N=1), dict(k=3, x=0.5, N=1), dict(k=3, x=10, N=-1),
                dict(k=3, x=10, N=1, eta=0.2), dict(k=3, x=10, N=1, delta=0.1),
                dict(k=4, x=10, N=1, delta=0.3)]:
        with pytest.raises(DomainError):
            VoronoiParams(**bad)
    with pytest.raises(DomainError):
        ContourSpec(nodes=50)
    with pytest.raises(DomainError):
        ContourSpec(t_max=2e4)


def test_contour_height():
    assert lemma5_T(VoronoiParams(3, 50, 5)) == pytest.approx(2 * math.pi * 275 ** (1 / 3))
    assert lemma5_T(VoronoiParams(3, 50, 5)) == pytest.approx(40.859, abs=1e-3)
    assert lemma5_T(VoronoiParams(4, 1, 0)) == pytest.approx(5.28351, abs=1e-5)
    assert lemma5_T(VoronoiParams(3, 1, 0)) == pytest.approx(4.98697, abs=1e-5)


def test_root_fraction_phase():
    n = np.arange(1, 2000, dtype=np.int64)
    for x, k in [(1e6 + 0.3, 3), (12345.0, 4), (7.0, 3)]:
        frac = root_fraction(n, x, k)
        direct = (n * x) ** (1 / k)
        # offsets differ from the direct root by integers
        diff = direct - frac
        assert np.allclose(diff, np.round(diff), atol=1e-9)
    # perfect cubes give zero offset
    assert root_fraction(np.array([8]), 125.0, 3)[0] == 0.0


def test_V_small_cases(d3, d4):
    assert eval_V(VoronoiParams(3, 123.4, 0), d3) == 0.0
    assert eval_V(VoronoiParams(3, 1, 1), d3) == pytest.approx(0, abs=1e-15)
    assert eval_V(VoronoiParams(4, 1, 1), d4) == pytest.approx(math.sqrt(2) / 2 / (4 * math.pi ** 2), rel=1e-13)
    assert lemma5_series(VoronoiParams(4, 1, 1), d4) == pytest.approx(0.0179112, abs=1e-7)
    with pytest.raises(DomainError):
        eval_V(VoronoiParams(4, 1, 1), d3)


def test_V_equals_cosine_series(d3, d4):
    for x, N in [(50, 5), (1e4 + 0.5, 300), (777.7, 1000)]:
        p3, p4 = VoronoiParams(3, x, N), VoronoiParams(4, x, N)
        assert lemma5_series(p3, d3) == pytest.approx(eval_V(p3, d3), rel=1e-13, abs=1e-12)
        assert lemma5_series(p4, d4) == pytest.approx(eval_V(p4, d4), rel=1e-13, abs=1e-12)


def test_V_direct_formula(d3):
    x, N = 4321.5, 50
    direct = sum(d3[n] / n * math.cos(6 * math.pi * (n * x) ** (1 / 3) + 1.5 * math.pi) for n in range(1, N + 1))
    assert eval_V(VoronoiParams(3, x, N), d3) == pytest.approx(x / (2 * math.pi ** 2 * math.sqrt(3)) * direct, rel=1e-12)


def test_truncated_formula_rhs(d3, d4):
    assert theorem2_rhs(VoronoiParams(3, 1, 1), d3) == pytest.approx(0.5 * P3_0 - 0.125, abs=1e-12)
    x = 345.6
    assert theorem2_rhs(VoronoiParams(3, x, 0), d3) == pytest.approx(0.5 * main_term(3, x) - x / 8)
    assert theorem2_rhs(VoronoiParams(4, 1, 1), d4) == pytest.approx(0.5 * main_term(4, 1) + 0.0179112, abs=1e-7)


def test_truncated_formula_records(d3, d4):
    r = thm2_residual(VoronoiParams(3, 1, 0), d3)
    assert r.residual == pytest.approx((1 - P3_0) - (0.5 * P3_0 - 0.125), abs=1e-12)
    r = thm2_residual(VoronoiParams(4, 1000, 1000), d4)
    eta = 0.01
    env = 1000 ** (1.25 + 5 * eta) * 1000 ** -0.25 * (1 + 1000 ** 0.75 / 1000 ** 1.25) + 1000 * 1000 ** eta
    assert r.normalizer == pytest.approx(env)
    assert math.isfinite(r.normalized_residual)


def test_K_asymptotic():
    y = 10
    assert K_asymptotic(4, y) == pytest.approx(0.5 * (math.pi / 2) ** 1.5 * y ** -3.5 * math.cos(40 + 7 * math.pi / 4))
    # cosine zero: 3y + 3pi/2 = pi/2 + 2 pi m  ->  y = 2 pi m/3 - pi/3
    y0 = 2 * math.pi * 5 / 3 - math.pi / 3
    assert K_asymptotic(3, y0) == pytest.approx(0, abs=1e-15)
    with pytest.raises(DomainError):
        K_asymptotic(3, 0.5)


@pytest.mark.parametrize("k", [3, 4])
def test_single_term_is_K(k, d3, d4):
    t = d3 if k == 3 else d4
    for x in (3.0, 50.0, 1e3):
        y = 2 * math.pi * x ** (1 / k)
        lhs = lemma5_series(VoronoiParams(k, x, 1), t)
        amp = 2 ** k * x ** 2 * y ** (-k / 2 - 1.5)
        assert lhs == pytest.approx(2 ** k * x ** 2 * K_asymptotic(k, y), abs=1e-12 * amp)


def test_perron_symmetry():
    val = line_integral(3, 50.0, -1 / 6, -30.0, 30.0)
    half = line_integral(3, 50.0, -1 / 6, 0.0, 30.0)
    assert abs(val.imag) <= 1e-8 * abs(val)
    assert val.real == pytest.approx(2 * half.real, rel=1e-9)


def test_perron_nonconvergence(monkeypatch):
    monkeypatch.setattr(vc, "MAX_QUAD_NODES", 256)
    with pytest.raises(ConvergenceError):
        perron_line_integral(3, 200.0, ContourSpec(sigma=-1 / 6, t_max=500.0))


def test_contour_oracle_small_grid(d3):
    vals = [lemma5_check(VoronoiParams(3, x, N), d3).normalized_residual
            for x, N in [(20, 1), (50, 5), (100, 8), (200, 10), (150, 3)]]
    assert max(abs(v) for v in vals) < 1


@pytest.mark.parametrize("k", [3, 4])
@pytest.mark.parametrize("s", [3.0, 1 + 0.3j, 0.2 - 1.7j])
def test_R_minus1_against_circle_oracle(k, s):
    got = R_minus1_eval(k, s)
    ref = R_minus1_oracle(k, s)
    assert abs(got - ref) <= 1e-6 * max(1, abs(ref))


def test_R_minus1_pole_guard():
    with pytest.raises(PoleError):
        R_minus1_eval(3, 2.05)


def test_residue_small():
    r = residue_check(3, 1, 0.1)
    assert r.lhs == pytest.approx(0.5 * P3_0, abs=1e-9)
    with pytest.raises(DomainError):
        residue_check(3, 10, 0.2)


def test_integral_voronoi(d3, d4):
    r = integral_delta_voronoi(VoronoiParams(3, 1, 0), d3)
    assert r.residual == pytest.approx(0.125, abs=1e-15)
    r = integral_delta_voronoi(VoronoiParams(3, 1e5, 10**5), d3)
    assert abs(r.normalized_residual) < 1
    r = integral_delta_voronoi(VoronoiParams(4, 1e4, 100), d4)
    assert math.isfinite(r.normalized_residual)


def test_integral_delta_growth_monitor(d3):
    from piltz.divisor_core import integral_delta
    xs = [10**3, 10**4, 10**5, 10**6]
    ratios = [abs(integral_delta(d3, x)) / (x * math.log(x) ** (8 / 3)) for x in xs]
    assert ratios[-1] <= 1.5 * max(ratios)
