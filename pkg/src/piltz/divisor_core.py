"""Exact d_k tables, summatory functions, Delta_k and its sum/integral.

The sieve is multiplicative: d_k(p^e) = C(e+k-1, k-1), so each segment starts
from ones and is multiplied prime power by prime power; whatever cofactor is
left after dividing out all primes <= sqrt(N) is a single large prime.
"""
from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import mpmath
import numpy as np

from .errors import DomainError, ResourceLimitError, UnsupportedError
from .records import ResidualRecord
from .special_fn import laurent_coefficient_mp

MAX_LIMIT = 10**8  # 800 MB of int64 values; beyond that the host runs out first
DEFAULT_SEGMENT = 1 << 20
CACHE_MAGIC = b"PLTZ1"


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DivisorTable:
    """d_k(1..N) as int64; index 0 of the backing array is a zero pad."""

    k: int
    limit: int
    _padded: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self._padded[1:]

    def __getitem__(self, n):
        return self._padded[n]

    @cached_property
    def prefix(self) -> np.ndarray:
        """prefix[n] = sum_{m<=n} d_k(m), exact int64."""
        out = np.cumsum(self._padded)
        out.flags.writeable = False
        return out

    @cached_property
    def weighted_prefix(self) -> np.ndarray:
        """weighted_prefix[n] = sum_{m<=n} m d_k(m), exact int64."""
        out = np.cumsum(self._padded * np.arange(self.limit + 1, dtype=np.int64))
        out.flags.writeable = False
        return out

    @cached_property
    def delta_values(self) -> np.ndarray:
        """Delta_k(n) for n = 0..N in float64 (entry 0 unused)."""
        n = np.arange(self.limit + 1, dtype=float)
        n[0] = 1.0
        poly = main_term_polynomial(self.k)
        out = self.prefix.astype(float) - n * poly(np.log(n))
        out[0] = 0.0
        out.flags.writeable = False
        return out

    @cached_property
    def delta_prefix(self) -> np.ndarray:
        """Running sums of Delta_k(n); floating, for grid monitors."""
        out = np.cumsum(self.delta_values)
        out.flags.writeable = False
        return out


def _small_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return np.nonzero(is_p)[0].astype(np.int64)


def _sieve_segment(out: np.ndarray, lo: int, hi: int, k: int, primes: np.ndarray) -> None:
    # fills out[lo:hi] with d_k(lo..hi-1); lo >= 1
    rem = np.arange(lo, hi, dtype=np.int64)
    val = np.ones(hi - lo, dtype=np.int64)
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        pe, e = p, 1
        while pe < hi:
            sl = slice((-lo) % pe, None, pe)
            rem[sl] //= p
            if e == 1:
                val[sl] *= k
            else:
                val[sl] = val[sl] // math.comb(e + k - 2, k - 1) * math.comb(e + k - 1, k - 1)
            pe *= p
            e += 1
    val[rem > 1] *= k
    out[lo:hi] = val


def build_divisor_table(k: int, N: int, segment_size: int = DEFAULT_SEGMENT,
                        workers: int = 1) -> DivisorTable:
    """Exact d_k(n) for 1 <= n <= N (2 <= k <= 4, N <= 1e8)."""
    if k not in (2, 3, 4):
        raise DomainError(f"order k must be 2, 3 or 4, got {k}")
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise DomainError(f"table limit must be a positive integer, got {N!r}")
    N = int(N)
    if N > MAX_LIMIT:
        raise ResourceLimitError(f"table limit {N} exceeds the cap {MAX_LIMIT}")
    try:
        padded = np.zeros(N + 1, dtype=np.int64)
    except MemoryError as exc:
        raise ResourceLimitError(f"cannot allocate a table of {N} entries") from exc
    primes = _small_primes(math.isqrt(N))
    bounds = [(lo, min(lo + segment_size, N + 1)) for lo in range(1, N + 1, segment_size)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: _sieve_segment(padded, b[0], b[1], k, primes), bounds))
    else:
        for lo, hi in bounds:
            _sieve_segment(padded, lo, hi, k, primes)
    padded.flags.writeable = False
    return DivisorTable(k, N, padded)


def save_table(table: DivisorTable, path) -> None:
    """Binary cache: b"PLTZ1", little-endian int64 k and N, then N int64 values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<qq", table.k, table.limit))
        fh.write(table.values.astype("<i8", copy=False).tobytes())


def load_table(path) -> DivisorTable:
    with open(path, "rb") as fh:
        if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
            raise DomainError(f"{path}: not a PLTZ1 table cache")
        k, N = struct.unpack("<qq", fh.read(16))
        raw = np.frombuffer(fh.read(8 * N), dtype="<i8")
    if raw.size != N:
        raise DomainError(f"{path}: truncated cache ({raw.size} of {N} values)")
    padded = np.zeros(N + 1, dtype=np.int64)
    padded[1:] = raw
    padded.flags.writeable = False
    return DivisorTable(int(k), int(N), padded)


# ---------------------------------------------------------------------------
# summatory functions
# ---------------------------------------------------------------------------

def _check_x(table: DivisorTable, x) -> int:
    if not x >= 1:
        raise DomainError(f"x must be >= 1, got {x!r}")
    if x >= table.limit + 1:
        raise DomainError(f"x = {x} exceeds the table limit {table.limit}")
    return int(math.floor(x))


def summatory_dk(table: DivisorTable, x) -> int:
    """sum_{n <= x} d_k(n), exact."""
    return int(table.prefix[_check_x(table, x)])


def _icbrt(n: int) -> int:
    r = int(round(n ** (1.0 / 3.0)))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def summatory_dk_fast(k: int, x) -> int:
    """sum_{n <= x} d_k(n) by the hyperbola method, k in {2, 3}.

    k = 2 costs O(sqrt x); k = 3 sums over ordered triples a <= b <= c with
    multiplicities 1, 3, 6 and costs O(x^(2/3)).
    """
    if k == 4:
        raise UnsupportedError("no sublinear evaluator for k = 4; use a sieve table")
    if k not in (2, 3):
        raise DomainError(f"order k must be 2 or 3, got {k}")
    if not x >= 1:
        raise DomainError(f"x must be >= 1, got {x!r}")
    X = int(math.floor(x))
    if k == 2:
        r = math.isqrt(X)
        i = np.arange(1, r + 1, dtype=np.int64)
        return 2 * int((X // i).sum()) - r * r
    total = 0
    for a in range(1, _icbrt(X) + 1):
        total += 3 * (X // (a * a) - a) + 1
        bmax = math.isqrt(X // a)
        if bmax > a:
            b = np.arange(a + 1, bmax + 1, dtype=np.int64)
            total += int((6 * (X // (a * b) - b) + 3).sum())
    return total


# ---------------------------------------------------------------------------
# main term
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MainTermPolynomial:
    """P_k(u) = sum a_j u^j with x P_k(log x) = Res_{s=1} zeta^k(s) x^s / s.

    Coefficients are mpmath reals at 40 digits; calling the object evaluates
    in float64 (scalars or arrays).
    """

    k: int
    coeffs: tuple

    def __call__(self, u):
        return np.polynomial.polynomial.polyval(u, [float(c) for c in self.coeffs])

    def derivative(self) -> tuple:
        return tuple(j * c for j, c in enumerate(self.coeffs))[1:]

    def eval_mp(self, u):
        return mpmath.polyval(list(reversed(self.coeffs)), u)

    def antiderivative_coeffs(self) -> tuple:
        """Q with int u P(log u) du = u^2/2 * Q(log u).

        int u L^j du = u^2/2 sum_{i<=j} (-1)^i j!/((j-i)! 2^i) L^(j-i).
        """
        q = [mpmath.mpf(0)] * self.k
        for j, a in enumerate(self.coeffs):
            for i in range(j + 1):
                q[j - i] += a * (-1) ** i * mpmath.mpf(math.factorial(j)) / (math.factorial(j - i) * 2 ** i)
        return tuple(q)


@lru_cache(maxsize=None)
def main_term_polynomial(k: int) -> MainTermPolynomial:
    if k not in (2, 3, 4):
        raise DomainError(f"order k must be 2, 3 or 4, got {k}")
    with mpmath.workdps(40):
        g0, g1, g2 = (laurent_coefficient_mp(j) for j in range(3))
        if k == 2:
            c = (2 * g0 - 1, mpmath.mpf(1))
        elif k == 3:
            c = (3 * g1 + 3 * g0**2 - 3 * g0 + 1, 3 * g0 - 1, mpmath.mpf(1) / 2)
        else:
            c = (4 * (g2 + 3 * g0 * g1 + g0**3) - (4 * g1 + 6 * g0**2) + 4 * g0 - 1,
                 4 * g1 + 6 * g0**2 - 4 * g0 + 1,
                 2 * g0 - mpmath.mpf(1) / 2,
                 mpmath.mpf(1) / 6)
    return MainTermPolynomial(k, tuple(c))


def main_term(k: int, x):
    """x P_k(log x); for k = 2 this is x (log x + 2 gamma_0 - 1)."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa >= 1)):
        raise DomainError("main term is only used for x >= 1")
    out = xa * main_term_polynomial(k)(np.log(xa))
    return float(out) if out.ndim == 0 else out


def delta_k(table: DivisorTable, x) -> float:
    """Delta_k(x) = sum_{n<=x} d_k(n) - x P_k(log x), floor semantics in the sum."""
    n = _check_x(table, x)
    return float(table.prefix[n]) - main_term(table.k, x)


def sum_delta(table: DivisorTable, x) -> float:
    """sum_{n <= x} Delta_k(n), compensated."""
    n = _check_x(table, x)
    return math.fsum(table.delta_values[1:n + 1])


def _antiderivative_mp(poly: MainTermPolynomial, u):
    q = poly.antiderivative_coeffs()
    return u * u / 2 * mpmath.polyval(list(reversed(q)), mpmath.log(u))


def integral_delta(table: DivisorTable, x) -> float:
    """int_1^x Delta_k(u) du, exact step-function part minus closed-form main part.

    int_1^x sum_{n<=u} d_k(n) du = x D(x) - sum_{n<=x} n d_k(n), and
    int u P(log u) du = u^2/2 Q(log u) (see MainTermPolynomial).
    """
    n = _check_x(table, x)
    poly = main_term_polynomial(table.k)
    with mpmath.workdps(40):
        xm = mpmath.mpf(x)
        step = (xm - n) * int(table.prefix[n]) + (n * int(table.prefix[n]) - int(table.weighted_prefix[n]))
        smooth = _antiderivative_mp(poly, xm) - _antiderivative_mp(poly, mpmath.mpf(1))
        return float(step - smooth)


def integral_delta_many(table: DivisorTable, xs) -> np.ndarray:
    """Vectorised float64 version of integral_delta for quadrature grids."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 1 or xs.max() >= table.limit + 1):
        raise DomainError("grid leaves [1, table limit]")
    n = np.floor(xs).astype(np.int64)
    D = table.prefix[n]
    exact = n * D - table.weighted_prefix[n]  # int64, exact
    step = (xs - n) * D + exact
    q = [float(c) for c in main_term_polynomial(table.k).antiderivative_coeffs()]
    smooth = xs * xs / 2 * np.polynomial.polynomial.polyval(np.log(xs), q) - q[0] / 2
    return step - smooth


# ---------------------------------------------------------------------------
# Segal's identity and the convexity of the main term
# ---------------------------------------------------------------------------

def g_prime(k: int, x) -> float:
    """d/dx of x P_k(log x) = P_k(log x) + P_k'(log x)."""
    poly = main_term_polynomial(k)
    L = math.log(x)
    dp = [float(c) for c in poly.derivative()]
    return float(poly(L)) + float(np.polynomial.polynomial.polyval(L, dp))


def segal_residual(table: DivisorTable, x) -> ResidualRecord:
    """sum Delta_k(n) against 1/2 g(x) + (1 - {x}) Delta_k(x) + int_1^x Delta_k."""
    if table.k not in (3, 4):
        raise DomainError("Segal check is set up for k = 3, 4")
    if not x >= 2:
        raise DomainError("Segal check needs x >= 2")
    frac = x - math.floor(x)
    lhs = sum_delta(table, x)
    rhs = 0.5 * main_term(table.k, x) + (1 - frac) * delta_k(table, x) + integral_delta(table, x)
    return ResidualRecord.build(table.k, x, math.floor(x), lhs, rhs, 1 + abs(g_prime(table.k, x)))


@dataclass(frozen=True)
class SignReport:
    k: int
    x: float
    value: float
    positive: bool


def g_second_derivative_sign(k: int, x) -> SignReport:
    """g''(x) = (P_k'(log x) + P_k''(log x)) / x for g(x) = x P_k(log x)."""
    if k not in (3, 4):
        raise DomainError("g'' sign report is set up for k = 3, 4")
    if not x >= 1:
        raise DomainError("x must be >= 1")
    c = main_term_polynomial(k).coeffs
    d1 = [j * c[j] for j in range(1, len(c))]
    d2 = [j * d1[j] for j in range(1, len(d1))]
    L = math.log(x)
    val = float((mpmath.polyval(list(reversed(d1)), L) + mpmath.polyval(list(reversed(d2)), L)) / x)
    if not val > 0:
        raise ArithmeticError(f"g''({x}) = {val} is not positive for k = {k}")
    return SignReport(k, float(x), val, True)
