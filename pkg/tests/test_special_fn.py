import math

import mpmath
import numpy as np
import pytest

from piltz.errors import DomainError, PoleError
from piltz.special_fn import (ComplexEvalConfig, chi, gamma, gamma_derivs, laurent_coefficient,
                              stieltjes, stieltjes_oracle, zeta, zeta_derivs)

G0 = 0.57721566490153286


def test_classical_values():
    assert zeta(0) == pytest.approx(-0.5, abs=1e-12)
    assert zeta(2) == pytest.approx(math.pi ** 2 / 6, abs=1e-12)
    assert gamma(1) == pytest.approx(1, abs=1e-14)
    assert zeta_derivs(0, 1) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-10)


def test_zeta_against_mpmath():
    pts = [-0.5 / 3 + 10j, 0.5 + 14.134725j, -3.7 + 2j, 2.5 - 40j, 0.3 + 999.5j, -0.9 + 9000j]
    for s in pts:
        ref = complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))
        assert abs(zeta(s) - ref) <= 1e-10 * max(1, abs(ref))


def test_zeta_second_derivative():
    ref = complex(mpmath.zeta(0, derivative=2))
    assert abs(zeta_derivs(0, 2) - ref) < 1e-8


def test_gamma_identities():
    z3 = float(mpmath.zeta(3))
    assert abs(gamma_derivs(1, 2) - (G0 ** 2 + math.pi ** 2 / 6)) <= 1e-10
    assert abs(gamma_derivs(1, 3) + 2 * z3 + G0 ** 3 + 0.5 * math.pi ** 2 * G0) <= 1e-10


def test_gamma_against_mpmath():
    for s in [0.3 + 0.1j, -2.5 + 0.5j, 7.25 - 3j, -0.01 + 0.0j, 20 + 30j]:
        ref = complex(mpmath.gamma(mpmath.mpc(s.real, s.imag)))
        assert abs(gamma(s) - ref) <= 1e-12 * abs(ref)


def test_errors():
    with pytest.raises(PoleError):
        zeta(1)
    with pytest.raises(DomainError):
        zeta(0.5 + 2e4j)
    with pytest.raises(PoleError):
        zeta_derivs(1.05, 1)
    with pytest.raises(PoleError):
        gamma_derivs(-2, 1)
    with pytest.raises(DomainError):
        stieltjes(3)
    with pytest.raises(DomainError):
        ComplexEvalConfig(deriv_circle_radius=0.3)


def test_functional_equation_grid():
    sig = np.linspace(-1, 2, 7)
    t = np.linspace(-50, 50, 11) + 0.37
    s = (sig[:, None] + 1j * t[None, :]).ravel()
    assert np.max(np.abs(zeta(s) - chi(s) * zeta(1 - s)) / np.maximum(1, np.abs(zeta(s)))) <= 1e-8


def test_cauchy_vs_finite_difference():
    rng = np.random.default_rng(3)
    h = 1e-4
    for _ in range(20):
        s = complex(rng.uniform(-1, 3), rng.uniform(-30, 30))
        if abs(s - 1) < 0.5:
            continue
        fd = (zeta(s + h) - zeta(s - h)) / (2 * h)
        assert abs(zeta_derivs(s, 1) - fd) <= 1e-6 * max(1, abs(fd))


def test_stieltjes_constants():
    assert stieltjes(0) == pytest.approx(0.57721566490153286, abs=1e-16)
    assert stieltjes(1) == pytest.approx(-0.07281584548367673, abs=1e-16)
    assert stieltjes(2) == pytest.approx(-0.00969036319287232, abs=1e-16)
    for j in range(3):
        assert abs(stieltjes_oracle(j) - mpmath.mpf(stieltjes(j))) < 1e-15
        with mpmath.workdps(40):
            assert abs(stieltjes_oracle(j, dps=40) - mpmath.stieltjes(j)) < mpmath.mpf(10) ** -20


def test_laurent_coefficients_from_circle():
    # (s-1) zeta(s) = 1 + c0 (s-1) + c1 (s-1)^2 + ...; read the Taylor coefficients off a circle
    theta = 2 * np.pi * np.arange(64) / 64
    w = 0.1 * np.exp(1j * theta)
    f = w * zeta(1 + w)
    coef = [np.mean(f * np.exp(-1j * m * theta)) / 0.1 ** m for m in range(3)]
    assert abs(coef[0] - 1) < 1e-12
    assert abs(coef[1] - laurent_coefficient(0)) < 1e-8
    assert abs(coef[2] - laurent_coefficient(1)) < 1e-8
    assert laurent_coefficient(1) == pytest.approx(-stieltjes(1))


@pytest.mark.parametrize("d", [1, 1j, -1, -1j])
def test_laurent_limit_along_directions(d):
    c0 = laurent_coefficient(0)
    for h in (1e-2, 1e-3, 1e-4):
        e = h * d
        val = zeta(1 + e)
        assert abs(e * val - 1) <= 1.1 * h
        assert abs(val - 1 / e - c0) <= 0.08 * h
