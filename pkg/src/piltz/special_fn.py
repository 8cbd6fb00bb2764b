"""Complex-plane evaluation of zeta, Gamma and their low-order derivatives.

zeta uses Euler-Maclaurin summation for Re(s) > -1 and the functional
equation to the left of that line.  log Gamma is the Stirling series on a
shifted argument, with reflection for Re(s) < 1/2.  Derivatives of either
function come from one kernel: the trapezoidal rule on a small circle
(Cauchy's integral formula), which converges geometrically for analytic
integrands.

Everything accepts complex scalars or numpy arrays.  The working range is
|Im s| <= 1e4; beyond it a Riemann-Siegel evaluator would be needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, PoleError

T_MAX = 1.0e4

# Standard Stieltjes constants gamma_j (zeta(s) = 1/(s-1) + sum (-1)^j gamma_j/j! (s-1)^j).
# Digits taken from the Euler-Maclaurin oracle `stieltjes_oracle` at 50 dps and
# cross-checked against mpmath.stieltjes; tests/test_special_fn.py re-derives them.
STIELTJES = (
    "0.57721566490153286060651209008240243104215933593992",
    "-0.072815845483676724860586375874901319137736338334338",
    "-0.0096903631928723184845303860352125293590658061013407",
)

_BERNOULLI = [float(mpmath.bernoulli(2 * j)) for j in range(0, 31)]  # B_0, B_2, ..., B_60
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class ComplexEvalConfig:
    """Truncation and precision knobs for every complex evaluation."""

    euler_maclaurin_cutoff: int = 50
    bernoulli_order: int = 10
    deriv_circle_radius: float = 0.125
    target_abs_tol: float = 1e-10
    deriv_nodes: int = 128

    def __post_init__(self):
        if self.euler_maclaurin_cutoff < 10:
            raise DomainError("euler_maclaurin_cutoff must be >= 10")
        if not 1 <= self.bernoulli_order <= 30:
            raise DomainError("bernoulli_order must lie in [1, 30]")
        if not 0 < self.deriv_circle_radius < 0.25:
            raise DomainError("deriv_circle_radius must lie in (0, 1/4)")
        if not self.target_abs_tol > 0:
            raise DomainError("target_abs_tol must be positive")
        if not 16 <= self.deriv_nodes <= 4096:
            raise DomainError("deriv_nodes must lie in [16, 4096]")


DEFAULT_CONFIG = ComplexEvalConfig()


def _as_array(s):
    arr = np.asarray(s, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("complex argument must be finite")
    return arr


def _check_height(arr):
    if arr.size and np.max(np.abs(arr.imag)) > T_MAX:
        raise DomainError(f"|Im s| exceeds the supported range {T_MAX:g}")


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

def _log_sin(w):
    """log sin(w), stable for large |Im w| (no overflow)."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    up = w.imag >= 0
    if np.any(up):
        wu = w[up]
        out[up] = -1j * wu + np.log(1 - np.exp(2j * wu)) + np.log(0.5j)
    if np.any(~up):
        wd = w[~up]
        out[~up] = 1j * wd + np.log(1 - np.exp(-2j * wd)) - np.log(2j)
    return out


def _stirling(w, terms=10):
    series = np.zeros_like(w)
    inv = 1.0 / w
    inv2 = inv * inv
    p = inv
    for j in range(1, terms + 1):
        series = series + _BERNOULLI[j] / (2 * j * (2 * j - 1)) * p
        p = p * inv2
    return (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series


def _nearest_nonpositive_int_distance(z):
    n = np.minimum(np.round(z.real), 0.0)
    return np.abs(z - n)


def loggamma(z):
    """log Gamma(z) on some branch; exp() of it is Gamma(z)."""
    arr = _as_array(z)
    flat = arr.ravel()
    if np.any(_nearest_nonpositive_int_distance(flat) < 1e-14):
        raise PoleError("Gamma has a pole at non-positive integers")
    out = np.empty_like(flat)
    refl = flat.real < 0.5
    if np.any(refl):
        zr = flat[refl]
        out[refl] = math.log(math.pi) - _log_sin(np.pi * zr) - _loggamma_right(1 - zr)
    if np.any(~refl):
        out[~refl] = _loggamma_right(flat[~refl])
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def _loggamma_right(z):
    # Re z >= 1/2; shift until |z + m| >= 15 so the Stirling tail is ~1e-20.
    w = z.copy()
    shift = np.where(np.abs(z) >= 15, 0, np.ceil(15 - z.real)).astype(int)
    acc = np.zeros_like(z)
    for j in range(int(shift.max(initial=0))):
        mask = shift > j
        acc[mask] += np.log(w[mask])
        w[mask] += 1
    return _stirling(w) - acc


def gamma(s, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """Gamma(s) for complex s off the non-positive integers."""
    return np.exp(loggamma(s))


# ---------------------------------------------------------------------------
# zeta
# ---------------------------------------------------------------------------

def _zeta_em(s, cfg):
    """Euler-Maclaurin zeta for a flat complex array (any sigma, s != 1)."""
    out = np.empty_like(s)
    if s.size == 0:
        return out
    order = np.argsort(np.abs(s))
    M = cfg.bernoulli_order
    start = 0
    while start < s.size:
        # N grows with |s| so that |s + 2M| / (2 pi N) stays below 1/(2 pi).
        idx = order[start:start + 256]
        N = max(cfg.euler_maclaurin_cutoff, int(abs(s[idx[-1]])) + 2 * M)
        idx = idx[:max(1, 4_000_000 // N)]
        sc = s[idx]
        logn = np.log(np.arange(1, N, dtype=float))
        head = np.exp(-np.outer(logn, sc)).sum(axis=0)
        logN = math.log(N)
        NmS = np.exp(-sc * logN)
        tail = N * NmS / (sc - 1) + 0.5 * NmS
        # sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) * N^(-s-2j+1)
        term = sc * NmS / N  # j = 1 without the Bernoulli factor
        corr = _BERNOULLI[1] / 2 * term
        fact = 2.0
        for j in range(2, M + 1):
            term = term * (sc + 2 * j - 3) * (sc + 2 * j - 2) / (N * N)
            fact *= (2 * j - 1) * (2 * j)
            corr = corr + _BERNOULLI[j] / fact * term
        out[idx] = head + tail + corr
        start += idx.size
    return out


def chi(s, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """The factor in zeta(s) = chi(s) zeta(1-s): 2^s pi^(s-1) sin(pi s/2) Gamma(1-s)."""
    arr = _as_array(s)
    flat = arr.ravel()
    out = np.empty_like(flat)
    # sin(pi s/2) vanishes at even integers exactly where Gamma(1-s) is finite,
    # and Gamma(1-s) has poles at s = 1, 2, 3, ... ; chi is finite except at odd s >= 1.
    even_zero = (np.abs(flat.imag) < 1e-300) & (np.abs(flat.real / 2 - np.round(flat.real / 2)) < 1e-15) & (flat.real <= 0)
    out[even_zero] = 0.0
    rest = ~even_zero
    if np.any(rest):
        sr = flat[rest]
        if np.any(_nearest_nonpositive_int_distance(1 - sr) < 1e-14):
            raise PoleError("chi(s) has poles at odd positive integers")
        logchi = sr * math.log(2) + (sr - 1) * math.log(math.pi) + _log_sin(np.pi * sr / 2) + loggamma(1 - sr)
        out[rest] = np.exp(logchi)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def zeta(s, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """Riemann zeta at complex s (scalar or array), |Im s| <= 1e4, s != 1."""
    arr = _as_array(s)
    _check_height(arr)
    flat = arr.ravel()
    if np.any(np.abs(flat - 1) < 1e-15):
        raise PoleError("zeta has a pole at s = 1")
    out = np.empty_like(flat)
    left = flat.real <= -1
    if np.any(~left):
        out[~left] = _zeta_em(flat[~left], cfg)
    if np.any(left):
        sl = flat[left]
        out[left] = chi(sl, cfg) * _zeta_em(1 - sl, cfg)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# derivatives by Cauchy circles
# ---------------------------------------------------------------------------

def cauchy_derivative(f, s, m, radius, nodes=128):
    """m-th derivative of analytic f at s from n trapezoid nodes on |z - s| = radius.

    Error budget: (radius/d)^nodes * max|f| from the nearest singularity at
    distance d, plus about m! * eps * max|f| / radius^m of rounding.
    `radius` may be an array broadcasting against `s`.
    """
    s_arr = np.asarray(s, dtype=complex)
    r = np.broadcast_to(np.asarray(radius, dtype=float), s_arr.shape)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    ring = np.exp(1j * theta)
    z = s_arr[..., None] + r[..., None] * ring
    vals = f(z)
    coef = np.mean(vals * np.exp(-1j * m * theta), axis=-1)
    out = math.factorial(m) * coef / r ** m
    return out[()] if np.ndim(out) == 0 else out


def zeta_derivs(s, m, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """m-th derivative of zeta (0 <= m <= 3); needs |s - 1| > the circle radius."""
    if m not in (0, 1, 2, 3):
        raise DomainError("derivative order must be 0..3")
    if m == 0:
        return zeta(s, cfg)
    arr = _as_array(s)
    if np.any(np.abs(arr - 1) <= cfg.deriv_circle_radius):
        raise PoleError("too close to the pole of zeta at s = 1 for the derivative circle")
    # shrink the circle when the pole sits within two radii
    r = np.minimum(cfg.deriv_circle_radius, np.abs(arr - 1) / 2)
    return cauchy_derivative(lambda z: zeta(z, cfg), arr, m, r, cfg.deriv_nodes)


def gamma_derivs(s, m, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """m-th derivative of Gamma (0 <= m <= 3) off the non-positive integers.

    The circle radius is cut to half the distance to the nearest pole, so
    points close to a pole are handled at the cost of some rounding.
    """
    if m not in (0, 1, 2, 3):
        raise DomainError("derivative order must be 0..3")
    arr = _as_array(s)
    d = _nearest_nonpositive_int_distance(arr)
    if np.any(d < 1e-8):
        raise PoleError("Gamma has a pole at non-positive integers")
    if m == 0:
        return gamma(arr, cfg)[()]
    r = np.minimum(cfg.deriv_circle_radius, d / 2)
    return cauchy_derivative(lambda z: gamma(z, cfg), arr, m, r, cfg.deriv_nodes)


# ---------------------------------------------------------------------------
# Stieltjes constants
# ---------------------------------------------------------------------------

def stieltjes_mp(j: int):
    if j not in (0, 1, 2):
        raise DomainError("only gamma_0, gamma_1, gamma_2 are stored")
    return mpmath.mpf(STIELTJES[j])


def stieltjes(j: int) -> float:
    """Standard Stieltjes constant gamma_j, j in {0, 1, 2}."""
    return float(stieltjes_mp(j))


def laurent_coefficient_mp(j: int):
    """Coefficient of (s-1)^j in zeta(s) - 1/(s-1), i.e. (-1)^j gamma_j / j!."""
    return (-1) ** j * stieltjes_mp(j) / math.factorial(j)


def laurent_coefficient(j: int) -> float:
    return float(laurent_coefficient_mp(j))


def stieltjes_oracle(j: int, dps: int = 50, N: int = 200, M: int = 40):
    """Recompute gamma_j by Euler-Maclaurin on sum (log k)^j / k, in mpmath.

    gamma_j = sum_{k<N} f(k) + f(N)/2 - (log N)^(j+1)/(j+1)
              - sum_{i=1}^{M} B_2i/(2i)! f^(2i-1)(N),   f(x) = (log x)^j / x.
    """
    with mpmath.workdps(dps):
        logN = mpmath.log(N)
        head = mpmath.fsum(mpmath.log(k) ** j / k for k in range(1, N))
        val = head + logN ** j / (2 * N) - logN ** (j + 1) / (j + 1)
        # f^(m)(x) = sum_i c[i] x^(-p) (log x)^i, tracked as {i: c} with power p
        coeffs = {j: mpmath.mpf(1)}
        p = 1
        for order in range(1, 2 * M):
            new = {}
            for i, c in coeffs.items():
                new[i] = new.get(i, 0) - p * c
                if i:
                    new[i - 1] = new.get(i - 1, 0) + i * c
            coeffs, p = new, p + 1
            if order % 2 == 1:
                deriv = mpmath.fsum(c * logN ** i for i, c in coeffs.items()) / mpmath.mpf(N) ** p
                val -= mpmath.bernoulli(order + 1) / mpmath.factorial(order + 1) * deriv
        return +val
