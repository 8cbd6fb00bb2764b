"""Truncated Voronoi series, their residual records, and the contour-integral oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .divisor_core import DivisorTable, integral_delta, main_term, sum_delta
from .errors import ConvergenceError, DomainError, PoleError
from .records import ResidualRecord
from .special_fn import (DEFAULT_CONFIG, T_MAX, ComplexEvalConfig, gamma, gamma_derivs,
                         laurent_coefficient, zeta, zeta_derivs)

MAX_QUAD_NODES = 1 << 18
QUAD_RTOL = 1e-8
_GL_ORDER = 16


@dataclass(frozen=True)
class VoronoiParams:
    """(k, x, N) plus the small exponents eta and delta.

    delta defaults to 1/6 for k = 3 (the only admissible value) and 0.05 for k = 4.
    """

    k: int
    x: float
    N: int
    eta: float = 0.01
    delta: float | None = None

    def __post_init__(self):
        if self.k not in (3, 4):
            raise DomainError(f"k must be 3 or 4, got {self.k}")
        if not self.x >= 1:
            raise DomainError(f"x must be >= 1, got {self.x}")
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"N must be a non-negative integer, got {self.N}")
        if not 0 < self.eta < 1 / 9:
            raise DomainError(f"eta must lie in (0, 1/9), got {self.eta}")
        if self.delta is None:
            object.__setattr__(self, "delta", 1 / 6 if self.k == 3 else 0.05)
        if self.k == 3 and abs(self.delta - 1 / 6) > 1e-15:
            raise DomainError("k = 3 requires delta = 1/6")
        if self.k == 4 and not 0 < self.delta <= 1 / 6:
            raise DomainError("k = 4 requires 0 < delta <= 1/6")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True)
class ContourSpec:
    """A vertical segment sigma + i[0, t_max] or a circle |s - center| = radius."""

    sigma: float = 0.0
    t_max: float = 0.0
    nodes: int = 128
    center: complex | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.nodes < 100:
            raise DomainError("a contour needs at least 100 nodes")
        if self.t_max > T_MAX:
            raise DomainError(f"t_max {self.t_max} exceeds {T_MAX:g}")
        if self.radius is not None and not self.radius > 0:
            raise DomainError("circle radius must be positive")


# ---------------------------------------------------------------------------
# cosine series
# ---------------------------------------------------------------------------

def lemma5_T(p: VoronoiParams) -> float:
    return 2 * math.pi * (p.x * (p.N + 0.5)) ** (1.0 / p.k)


def _iroot(m: np.ndarray, k: int) -> np.ndarray:
    r = np.floor(np.power(m.astype(float), 1.0 / k)).astype(np.int64)
    r -= (r ** k > m)
    r += ((r + 1) ** k <= m)
    return r


def root_fraction(n: np.ndarray, x: float, k: int) -> np.ndarray:
    """Fractional offset (n x)^(1/k) - r for an integer r, accurate to ~1e-16 absolute.

    Since k r is an integer, 2 pi k (n x)^(1/k) and 2 pi k times this offset
    agree mod 2 pi, which keeps cosine phases accurate for n x up to ~1e15.
    """
    n = np.asarray(n, dtype=np.int64)
    xi = math.floor(x)
    xf = x - xi
    nf = n * xf
    fl = np.floor(nf)
    m = n * xi + fl.astype(np.int64)
    f = nf - fl
    r = _iroot(m, k)
    rk = (r ** k).astype(float)
    rel = ((m - r ** k).astype(float) + f) / np.where(rk > 0, rk, 1.0)
    out = np.where(r > 0, r * np.expm1(np.log1p(rel) / k), f ** (1.0 / k))
    return out


def _cos_terms(k: int, x: float, n: np.ndarray, phase_shift: float) -> np.ndarray:
    frac = root_fraction(n, x, k)
    return np.cos(2 * math.pi * k * frac + phase_shift)


def _check_table(p: VoronoiParams, table: DivisorTable) -> None:
    if table.k != p.k:
        raise DomainError(f"table has k = {table.k}, params have k = {p.k}")
    if p.N > table.limit:
        raise DomainError(f"N = {p.N} exceeds the table limit {table.limit}")


def cosine_sum(k: int, x: float, N: int, table: DivisorTable, power: float) -> float:
    """sum_{n<=N} d_k(n) n^(-power) cos(2 pi k (n x)^(1/k) + pi (k+3)/4), via fsum."""
    if N == 0:
        return 0.0
    n = np.arange(1, N + 1, dtype=np.int64)
    terms = table[1:N + 1] * n.astype(float) ** (-power) * _cos_terms(k, x, n, math.pi * (k + 3) / 4)
    return math.fsum(terms)


def eval_V(p: VoronoiParams, table: DivisorTable) -> float:
    """V_3 = x/(2 pi^2 sqrt3) sum d_3/n cos(...), V_4 = x^(9/8)/(4 pi^2) sum d_4/n^(7/8) cos(...)."""
    _check_table(p, table)
    if p.k == 3:
        return p.x / (2 * math.pi ** 2 * math.sqrt(3)) * cosine_sum(3, p.x, p.N, table, 1.0)
    return p.x ** 1.125 / (4 * math.pi ** 2) * cosine_sum(4, p.x, p.N, table, 0.875)


def lemma5_series(p: VoronoiParams, table: DivisorTable) -> float:
    """General-k main series; coincides with eval_V for k = 3, 4."""
    _check_table(p, table)
    k, x = p.k, p.x
    pref = x ** (1.5 - 1.5 / k) / (2 * math.pi ** 2 * math.sqrt(k))
    return pref * cosine_sum(k, x, p.N, table, 0.5 + 1.5 / k)


def K_asymptotic(k: int, y: float) -> float:
    """Leading term (1/sqrt k)(pi/2)^(k/2-1/2) y^(-k/2-3/2) cos(k y + pi(k+3)/4)."""
    if not y >= 1:
        raise DomainError(f"K asymptotic needs y >= 1, got {y}")
    return (1 / math.sqrt(k)) * (math.pi / 2) ** (k / 2 - 0.5) * y ** (-k / 2 - 1.5) \
        * math.cos(k * y + math.pi * (k + 3) / 4)


def theorem2_rhs(p: VoronoiParams, table: DivisorTable) -> float:
    rhs = 0.5 * main_term(p.k, p.x) + eval_V(p, table)
    if p.k == 3:
        rhs -= p.x / 8
    return rhs


def thm2_envelope(p: VoronoiParams) -> float:
    x, N, eta = p.x, max(p.N, 1), p.eta
    if p.k == 3:
        return x ** (7 / 6 + 5 * eta) * N ** (-1 / 3) * (1 + N / x)
    return x ** (1.25 + 5 * eta) * N ** -0.25 * (1 + N ** 0.75 / x ** 1.25) + x * N ** eta


def thm2_residual(p: VoronoiParams, table: DivisorTable) -> ResidualRecord:
    """sum_{n<=x} Delta_k(n) against the truncated formula, scaled by its O-envelope."""
    if p.x >= table.limit + 1:
        raise DomainError(f"x = {p.x} exceeds the table limit {table.limit}")
    return ResidualRecord.build(p.k, p.x, p.N, sum_delta(table, p.x), theorem2_rhs(p, table),
                                thm2_envelope(p))


def eq9_envelope(p: VoronoiParams) -> float:
    x, N = p.x, max(p.N, 1)
    first = x ** (1.5 + p.eta) / (x * N) ** (1.0 / p.k)
    return first + (x ** (5 / 6) if p.k == 3 else x * N ** p.delta)


def integral_delta_voronoi(p: VoronoiParams, table: DivisorTable) -> ResidualRecord:
    """int_1^x Delta_k against V_k(x, N) (- x/8 for k = 3)."""
    rhs = eval_V(p, table) - (p.x / 8 if p.k == 3 else 0.0)
    return ResidualRecord.build(p.k, p.x, p.N, integral_delta(table, p.x), rhs, eq9_envelope(p))


# ---------------------------------------------------------------------------
# Perron line integral
# ---------------------------------------------------------------------------

def _gl_panels(a: float, b: float, panels: int):
    nodes, weights = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return t, w


def _line_integrand(k, x, sigma, t, cfg):
    s = sigma + 1j * t
    return zeta(s, cfg) ** k * np.exp((s + 1) * math.log(x)) / (s * (s + 1))


def line_integral(k: int, x: float, sigma: float, t0: float, t1: float,
                  cfg: ComplexEvalConfig = DEFAULT_CONFIG, initial_nodes: int = 128) -> complex:
    """int_{t0}^{t1} zeta^k(s) x^(s+1)/(s(s+1)) dt on s = sigma + it (no 1/2pi factor).

    Composite 16-point Gauss-Legendre; panels double until successive values
    agree to QUAD_RTOL relative to the integral of |f|, else ConvergenceError.
    """
    panels = max(1, initial_nodes // _GL_ORDER)
    prev = None
    while panels * _GL_ORDER <= MAX_QUAD_NODES:
        t, w = _gl_panels(t0, t1, panels)
        f = _line_integrand(k, x, sigma, t, cfg)
        val = complex(np.dot(w, f))
        scale = float(np.dot(w, np.abs(f)))
        if prev is not None and abs(val - prev) <= QUAD_RTOL * max(scale, 1e-300):
            return val
        prev = val
        panels *= 2
    raise ConvergenceError(f"line integral on [{t0}, {t1}] not converged with {MAX_QUAD_NODES} nodes")


def perron_line_integral(k: int, x: float, spec: ContourSpec,
                         cfg: ComplexEvalConfig = DEFAULT_CONFIG) -> float:
    """(1/2 pi i) int_{sigma-iT}^{sigma+iT} zeta^k(s) x^(s+1)/(s(s+1)) ds.

    The integrand at conj(s) is the conjugate, so this is (1/pi) Re int_0^T.
    """
    if k not in (3, 4):
        raise DomainError("k must be 3 or 4")
    if not spec.sigma < 0:
        raise DomainError("the line must lie left of 0 (sigma = -delta)")
    val = line_integral(k, x, spec.sigma, 0.0, spec.t_max, cfg, spec.nodes)
    return val.real / math.pi


def lemma5_envelope(p: VoronoiParams) -> float:
    return p.x ** (1.5 - 2 / p.k) * max(p.N, 1) ** (0.5 - 2 / p.k + p.delta)


def lemma5_check(p: VoronoiParams, table: DivisorTable,
                 cfg: ComplexEvalConfig = DEFAULT_CONFIG) -> ResidualRecord:
    spec = ContourSpec(sigma=-p.delta, t_max=lemma5_T(p))
    lhs = perron_line_integral(p.k, p.x, spec, cfg)
    return ResidualRecord.build(p.k, p.x, p.N, lhs, lemma5_series(p, table), lemma5_envelope(p))


# ---------------------------------------------------------------------------
# R_{-1}(s) and the residue identity
# ---------------------------------------------------------------------------

def R_minus1_eval(k: int, s, cfg: ComplexEvalConfig = DEFAULT_CONFIG):
    """Closed form of Res_{z=-1} Gamma(s+z)Gamma(-z)/Gamma(s) zeta(s+z) zeta^k(-z), k = 3, 4.

    Written in the Laurent coefficients g_j of zeta at 1 and derivatives of
    zeta and Gamma at s - 1. Scalar or array s.
    """
    if k not in (3, 4):
        raise DomainError("k must be 3 or 4")
    s = np.asarray(s, dtype=complex)
    if np.any(np.abs(s - 2) <= cfg.deriv_circle_radius):
        raise PoleError("R_{-1} closed form needs s away from 2")
    g0, g1, g2 = (laurent_coefficient(j) for j in range(3))
    w = s - 1
    Z = [zeta_derivs(w, m, cfg) for m in range(k)]
    G = [gamma_derivs(w, m, cfg) for m in range(k)]
    Gs = gamma(s, cfg)
    pi2 = math.pi ** 2
    if k == 3:
        out = (G[0] * (-(3 * g1 + g0 ** 2 / 2 + pi2 / 12) * Z[0] + 2 * g0 * Z[1] - 0.5 * Z[2])
               + G[1] * (2 * g0 * Z[0] - Z[1])
               - G[2] * Z[0] / 2) / Gs
    else:
        z3 = 1.2020569031595942854
        c = 4 * g1 + 2.5 * g0 ** 2 + pi2 / 12
        out = (G[0] * (-(4 * g2 + 8 * g0 * g1 - g0 ** 3 / 6 + pi2 / 4 * g0 - z3 / 3) * Z[0]
                       + c * Z[1] - 1.5 * g0 * Z[2] + Z[3] / 6)
               + G[1] * (c * Z[0] - 3 * g0 * Z[1] + 0.5 * Z[2])
               + G[2] * (-1.5 * g0 * Z[0] + 0.5 * Z[1])
               + G[3] * Z[0] / 6) / Gs
    return out[()] if out.ndim == 0 else out


def R_minus1_oracle(k: int, s: complex, r: float = 0.1, nodes: int = 256, dps: int = 30) -> complex:
    """Independent mpmath evaluation of R_{-1}(s) as a circle integral about z = -1."""
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        acc = mpmath.mpc(0)
        for j in range(nodes):
            e = mpmath.expjpi(mpmath.mpf(2 * j) / nodes)
            z = -1 + r * e
            f = mpmath.gamma(s + z) * mpmath.gamma(-z) / mpmath.gamma(s) * mpmath.zeta(s + z) * mpmath.zeta(-z) ** k
            acc += f * r * e  # dz / (2 pi i) = r e dtheta / (2 pi)
        return complex(acc / nodes)


def residue_check(k: int, x: float, r: float = 0.1, cfg: ComplexEvalConfig = DEFAULT_CONFIG,
                  nodes: int = 128) -> ResidualRecord:
    """Res_{s=1} R_{-1}(s) x^s / s by the trapezoid rule on |s-1| = r, against x P_k(log x)/2."""
    if not 0 < r < 0.125:
        raise DomainError("radius must lie in (0, 1/8)")
    if not x >= 1:
        raise DomainError("x must be >= 1")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    s = 1 + r * e
    f = R_minus1_eval(k, s, cfg) * np.exp(s * math.log(x)) / s
    res = complex(np.mean(f * r * e))
    if not np.isfinite(res):
        raise ConvergenceError("residue quadrature produced a non-finite value")
    return ResidualRecord.build(k, x, 0, res.real, 0.5 * main_term(k, x), 1.0)
