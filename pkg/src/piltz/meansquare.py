"""Mean squares of V_k and second moments of the integrated error term."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .divisor_core import DivisorTable, _small_primes, integral_delta_many
from .errors import ConvergenceError, DomainError
from .records import ResidualRecord

EULER_CUTOFF = 10**6
_GL8 = np.polynomial.legendre.leggauss(8)
_CHUNK = 2_000_000  # matrix entries per vectorised block


def series_exponent(k: int) -> Fraction:
    if k == 3:
        return Fraction(2)
    if k == 4:
        return Fraction(7, 4)
    raise DomainError(f"k must be 3 or 4, got {k}")


def leading_denominator(k: int) -> float:
    """72 pi^4 for k = 3 and 104 pi^4 for k = 4."""
    return (72 if k == 3 else 104) * math.pi ** 4


@dataclass(frozen=True)
class SeriesConstant:
    k: int
    exponent: Fraction
    value: float
    tail_bound: float


def _local_coeffs(k: int, jmax: int) -> list[int]:
    return [math.comb(j + k - 1, k - 1) ** 2 for j in range(jmax + 1)]


def euler_product(k: int, s: float, cutoff: int = EULER_CUTOFF) -> tuple[float, float]:
    """sum_n d_k(n)^2 n^-s as prod_p sum_j C(j+k-1,k-1)^2 p^(-js), with an error bound.

    Primes up to `cutoff` are multiplied in directly (local series summed until
    the terms fall below 1e-20). For p > cutoff, log of the local factor is
    b1 p^-s + b2 p^-2s + r_p with b1 = k^2, b2 = c2 - k^4/2, and the prime
    sums beyond the cutoff come from the prime zeta function. |r_p| is bounded
    by a geometric series in p^-s using d_k(p^j) <= (j+1)^(k-1).
    """
    if not s > 1:
        raise DomainError("series needs s > 1")
    primes = _small_primes(cutoff).astype(float)
    jmax = 1
    while 2.0 ** (-jmax * s) * (jmax + 1) ** (2 * k - 2) > 1e-20:
        jmax += 1
    coeffs = _local_coeffs(k, jmax)
    ps = primes ** -s
    local = np.polynomial.polynomial.polyval(ps, coeffs)
    log_head = math.fsum(np.log(local))
    b1 = k * k
    b2 = coeffs[2] - k ** 4 / 2
    with mpmath.workdps(30):
        tail1 = mpmath.primezeta(s) - mpmath.mpf(math.fsum(ps))
        tail2 = mpmath.primezeta(2 * s) - mpmath.mpf(math.fsum(ps * ps))
        log_tail = float(b1 * tail1 + b2 * tail2)
    # remainder: log(1+u) - u + u^2/2 and the j >= 3 local terms, both O(p^-3s)
    q = (cutoff + 1.0) ** -s
    c3 = sum(coeffs[j] * q ** (j - 3) for j in range(3, jmax + 1)) + 4 * b1 ** 3
    rem = c3 * (cutoff + 1.0) ** (1 - 3 * s) / (3 * s - 1) * 2
    value = math.exp(log_head + log_tail)
    # np.log on ~1e5 factors and float conversions of the prime-zeta tails
    rounding = value * 1e-13
    return value, value * (math.expm1(rem)) + rounding


@lru_cache(maxsize=None)
def series_constant(k: int, cutoff: int = EULER_CUTOFF) -> SeriesConstant:
    """sum d_3(n)^2/n^2 (k = 3) or sum d_4(n)^2/n^(7/4) (k = 4)."""
    e = series_exponent(k)
    value, bound = euler_product(k, float(e), cutoff)
    return SeriesConstant(k, e, value, bound)


def rankin_tail_bound(k: int, X: int, s: float) -> float:
    """sum_{n>X} d_k(n)^2 n^-s <= X^(sigma-s) sum_n d_k(n)^2 n^-sigma, best sigma on a grid."""
    best = math.inf
    for sigma in np.linspace(1 + (s - 1) / 20, s - (s - 1) / 20, 19):
        val, err = euler_product(k, float(sigma), cutoff=10**5)
        best = min(best, X ** (sigma - s) * (val + err))
    return best


def partial_series(table: DivisorTable, X: int) -> float:
    s = float(series_exponent(table.k))
    n = np.arange(1, X + 1, dtype=float)
    return math.fsum(table.values[:X].astype(float) ** 2 * n ** -s)


# ---------------------------------------------------------------------------
# V_k on arrays of x
# ---------------------------------------------------------------------------

def _V_many(k: int, xs: np.ndarray, N: int, table: DivisorTable) -> np.ndarray:
    if N == 0:
        return np.zeros_like(xs)
    n = np.arange(1, N + 1, dtype=float)
    if k == 3:
        coef = table[1:N + 1] / n
        pref = xs / (2 * math.pi ** 2 * math.sqrt(3))
    else:
        coef = table[1:N + 1] * n ** -0.875
        pref = xs ** 1.125 / (4 * math.pi ** 2)
    shift = math.pi * (k + 3) / 4
    root_n = n ** (1.0 / k)
    out = np.empty_like(xs)
    step = max(1, _CHUNK // N)
    for i in range(0, xs.size, step):
        xr = xs[i:i + step] ** (1.0 / k)
        ph = 2 * math.pi * k * np.outer(xr, root_n) + shift
        out[i:i + step] = np.cos(ph) @ coef
    return pref * out


def _panel_edges(k: int, X: float, N: int, refine: int = 1) -> np.ndarray:
    """Edges on [1, X] with width min(1, x^(1-1/k)/(k N^(1/k))) / refine."""
    edges = [1.0]
    Nk = max(N, 1) ** (1.0 / k)
    x = 1.0
    while x < X:
        x = min(X, x + min(1.0, x ** (1 - 1.0 / k) / (k * Nk)) / refine)
        edges.append(x)
    return np.asarray(edges)


def _integrate_panels(f, edges: np.ndarray) -> float:
    nodes, weights = _GL8
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = f(xs).reshape(-1, nodes.size)
    return float(np.sum((vals @ weights) * half))


@dataclass(frozen=True)
class MeanSquareResult:
    k: int
    X: float
    N: int
    value: float
    halving_error: float
    panels: int

    def leading_term(self) -> float:
        c = series_constant(self.k).value
        return c / leading_denominator(self.k) * self.X ** (3 if self.k == 3 else 3.25)

    def relative_deviation(self) -> float:
        lead = self.leading_term()
        return (self.value - lead) / lead


def mean_square_V(k: int, X: float, N: int, table: DivisorTable, rtol: float = 1e-6) -> MeanSquareResult:
    """int_1^X V_k(x, N)^2 dx by panelled 8-point Gauss-Legendre.

    The panel width tracks the fastest phase 2 pi k (N x)^(1/k); the rule is
    rerun on halved panels and the difference is reported (and must stay below
    rtol relative, else ConvergenceError).
    """
    if table.k != k or N > table.limit or N < 0:
        raise DomainError("need a table of the same k covering N")
    if not X >= 2:
        raise DomainError("X must be >= 2")
    f = lambda xs: _V_many(k, xs, N, table) ** 2
    edges = _panel_edges(k, X, N)
    coarse = _integrate_panels(f, edges)
    fine = _integrate_panels(f, _panel_edges(k, X, N, refine=2))
    err = abs(fine - coarse)
    if err > rtol * max(abs(fine), 1e-300):
        raise ConvergenceError(f"mean square halving check failed: {err:.3g} vs {fine:.3g}")
    return MeanSquareResult(k, float(X), int(N), fine, err, edges.size - 1)


# ---------------------------------------------------------------------------
# second moments of int_1^x Delta_k
# ---------------------------------------------------------------------------

_GL6 = np.polynomial.legendre.leggauss(6)


def second_moment_cumulative(table: DivisorTable, X: int) -> np.ndarray:
    """out[j] = int_1^(j+2) (int_1^x Delta_k)^2 dx, j = 0..X-2.

    int_1^x Delta_k is smooth between consecutive integers (its derivative
    jumps there), so six Gauss nodes per unit interval are essentially exact.
    """
    if X > table.limit or X < 2:
        raise DomainError("need 2 <= X <= table limit")
    nodes, w = _GL6
    out = np.empty(X - 1)
    block = 1 << 18
    acc = 0.0
    for lo in range(1, X, block):
        a = np.arange(lo, min(lo + block, X), dtype=float)
        xs = a[:, None] + 0.5 + 0.5 * nodes[None, :]
        F = integral_delta_many(table, xs.ravel()).reshape(xs.shape)
        per = (F * F) @ w * 0.5
        c = np.cumsum(per) + acc
        out[lo - 1:lo - 1 + a.size] = c
        acc = c[-1]
    return out


def second_moment_main(k: int, X: float) -> float:
    c = series_constant(k).value / leading_denominator(k)
    if k == 3:
        return (c + 1 / 192) * X ** 3
    return c * X ** 3.25


def second_moment_integral(k: int, X: int, table: DivisorTable) -> ResidualRecord:
    """int_1^X (int_1^x Delta_k)^2 dx against its main term, scaled by X^(17/6) or X^(25/8)."""
    if table.k != k:
        raise DomainError("table order mismatch")
    X = int(X)
    lhs = float(second_moment_cumulative(table, X)[-1])
    norm = X ** (17 / 6) if k == 3 else X ** (25 / 8)
    return ResidualRecord.build(k, X, X, lhs, second_moment_main(k, X), norm)


@dataclass(frozen=True)
class LeadingFit:
    k: int
    coefficient: float
    correction: float
    correction_power: float
    X_range: tuple


def fit_leading_coefficient(table: DivisorTable, X_min: int = 1000, points: int = 60) -> LeadingFit:
    """Least squares of M(X)/X^p = c + d X^(-q) on a log grid of X.

    p = 3, q = 1/6 for k = 3 and p = 13/4, q = 1/8 for k = 4, following the
    sizes of the main and error terms.
    """
    k = table.k
    p, q = (3.0, 1 / 6) if k == 3 else (3.25, 1 / 8)
    X_max = table.limit
    cum = second_moment_cumulative(table, X_max)
    Xs = np.unique(np.geomspace(X_min, X_max, points).astype(np.int64))
    y = cum[Xs - 2] / Xs.astype(float) ** p
    A = np.column_stack([np.ones(Xs.size), Xs.astype(float) ** -q])
    (c, d), *_ = np.linalg.lstsq(A, y, rcond=None)
    return LeadingFit(k, float(c), float(d), q, (int(Xs[0]), int(Xs[-1])))
