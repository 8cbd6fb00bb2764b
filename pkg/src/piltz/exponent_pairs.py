"""Exact exponent-pair calculus and the piecewise-affine minimax behind the k = 4 exponent."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .divisor_core import DivisorTable
from .errors import DomainError
from .voronoi_contour import cosine_sum, root_fraction

HALF = Fraction(1, 2)


def as_fraction(v) -> Fraction:
    """Parse "p/q", ints, or Fractions; floats are rejected to keep arithmetic exact."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {v!r}") from exc
    raise DomainError(f"expected an exact rational, got {type(v).__name__}")


@dataclass(frozen=True)
class ExponentPair:
    kappa: Fraction
    lam: Fraction
    eps_flag: bool = False
    provenance: str = ""

    def __post_init__(self):
        k, l = as_fraction(self.kappa), as_fraction(self.lam)
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "lam", l)
        if not (0 <= k <= HALF <= l <= 1):
            raise DomainError(f"({k}, {l}) lies outside [0,1/2]x[1/2,1]")

    @property
    def core(self) -> tuple[Fraction, Fraction]:
        return (self.kappa, self.lam)

    def __str__(self):
        return f"{self.kappa} {self.lam}"


def pair(kappa, lam, eps: bool = False, provenance: str = "") -> ExponentPair:
    return ExponentPair(as_fraction(kappa), as_fraction(lam), eps, provenance)


def process_A(p: ExponentPair) -> ExponentPair:
    """(k, l) -> (k/(2k+2), 1/2 + l/(2k+2))."""
    d = 2 * p.kappa + 2
    return ExponentPair(p.kappa / d, HALF + p.lam / d, p.eps_flag, "A" + p.provenance)


def process_B(p: ExponentPair) -> ExponentPair:
    """(k, l) -> (l - 1/2, k + 1/2); an involution."""
    return ExponentPair(p.lam - HALF, p.kappa + HALF, p.eps_flag, "B" + p.provenance)


_TERM = re.compile(r"([AB])(\d*)")


def parse_word(word: str) -> list[str]:
    """Expand e.g. "A3BA2B" to ["A","A","A","B","A","A","B"]."""
    word = word.strip()
    pos, out = 0, []
    while pos < len(word):
        m = _TERM.match(word, pos)
        if not m:
            raise DomainError(f"malformed process word {word!r} at position {pos}")
        reps = int(m.group(2)) if m.group(2) else 1
        if reps < 1:
            raise DomainError(f"zero repetition in {word!r}")
        out.extend(m.group(1) * reps)
        pos = m.end()
    return out


def reduce_word(word: str, seed: ExponentPair) -> ExponentPair:
    """Apply the word to the seed, rightmost letter first."""
    p = seed
    for letter in reversed(parse_word(word)):
        p = process_A(p) if letter == "A" else process_B(p)
    return ExponentPair(p.kappa, p.lam, seed.eps_flag, word + ("" if not seed.provenance else f"({seed.provenance})"))


TRIVIAL = pair(0, 1, provenance="trivial")
HALF_HALF = pair(HALF, HALF, provenance="(1/2,1/2)")
K0 = pair("13/84", "55/84", True, "Bourgain")
K1 = pair("4742/38463", "35731/51284", True, "Trudgian-Yang k1")
K4 = pair("715/10238", "7955/10238", True, "Trudgian-Yang k4")
K5 = pair("2371/43205", "280013/345640", True, "Trudgian-Yang k5")


def pair_database() -> dict[str, ExponentPair]:
    """Named pairs; k5 is checked to be A(k1) on every call."""
    if process_A(K1).core != K5.core:
        raise AssertionError("k5 != A(k1)")
    return {"trivial": TRIVIAL, "half": HALF_HALF, "k0": K0, "k1": K1, "k4": K4, "k5": K5}


def theta4(rho) -> Fraction:
    """(9 + 10 rho) / (8 + 8 rho)."""
    rho = as_fraction(rho)
    if not 0 <= rho <= HALF:
        raise DomainError(f"rho must lie in [0, 1/2], got {rho}")
    return (9 + 10 * rho) / (8 + 8 * rho)


@dataclass(frozen=True)
class KLReport:
    pair: ExponentPair
    two_q_minus_p: Fraction
    p_plus_q: Fraction
    ok: bool


def kl_properties_check(p: ExponentPair) -> KLReport:
    """For p = A(k, k + 1/2): 2Q - P = 3/2 and P + Q <= 1, exactly."""
    P, Q = p.core
    seed_k = 2 * P / (1 - 2 * P)  # invert the first coordinate of A
    seed_l = (Q - HALF) * (2 * seed_k + 2)
    if not (0 <= seed_k <= HALF and seed_l - seed_k == HALF):
        raise DomainError(f"{p} is not A of a seed on the segment (0,1/2)-(1/2,1)")
    report = KLReport(p, 2 * Q - P, P + Q, 2 * Q - P == Fraction(3, 2) and P + Q <= 1)
    if not report.ok:
        raise AssertionError(f"KL properties fail for {p}")
    return report


# ---------------------------------------------------------------------------
# strategy exponents on the (a, m) region
# ---------------------------------------------------------------------------

def _check_region(a, m):
    if not (0 <= a <= HALF and a / 4 <= m <= a):
        raise DomainError(f"(a, m) = ({a}, {m}) outside 0<=a<=1/2, a/4<=m<=a")


def type1_exponent(p: ExponentPair, a, m):
    """kappa/4 + (1/8 + kappa/4) a + (lambda - kappa - 1) m."""
    _check_region(a, m)
    k, l = p.core
    return k / 4 + (Fraction(1, 8) + k / 4) * a + (l - k - 1) * m


def type1_first_use_exponent(p: ExponentPair, a, m=None):
    """kappa/4 + (lambda/2 - kappa/4 - 3/8) a; type1_exponent at m = a/2."""
    k, l = p.core
    return k / 4 + (l / 2 - k / 4 - Fraction(3, 8)) * a


def large_sieve_exponent(p: ExponentPair, a, m):
    """-7a/8 + max(P(1+a)/4 + Q(a-m) + (1-P)m, a - m/2) with (P, Q) = p."""
    _check_region(a, m)
    P, Q = p.core
    return -Fraction(7, 8) * a + max(P * (1 + a) / 4 + Q * (a - m) + (1 - P) * m, a - m / 2)


# An affine form c + ca*a + cm*m is stored as a Fraction triple.
Affine = tuple


@dataclass(frozen=True)
class Strategy:
    """One bound for S*: kind in {type1, first_use, lemma7} with the pair fed to its formula."""

    kind: str
    pair: ExponentPair

    def __post_init__(self):
        if self.kind not in ("type1", "first_use", "lemma7"):
            raise DomainError(f"unknown strategy kind {self.kind!r}")

    def branches(self) -> list[Affine]:
        """Affine pieces; the exponent is their max (a single piece unless lemma7)."""
        k, l = self.pair.core
        if self.kind == "type1":
            return [(k / 4, Fraction(1, 8) + k / 4, l - k - 1)]
        if self.kind == "first_use":
            return [(k / 4, l / 2 - k / 4 - Fraction(3, 8), Fraction(0))]
        P, Q = k, l
        return [(P / 4, -Fraction(7, 8) + P / 4 + Q, 1 - P - Q),
                (Fraction(0), Fraction(1, 8), -HALF)]

    def value(self, a, m):
        return max(c + ca * a + cm * m for c, ca, cm in self.branches())

    def label(self) -> str:
        return f"{self.kind}[{self.pair.provenance or self.pair}]"


@dataclass(frozen=True)
class StrategySet:
    """Strategies available where M4 >= sqrt(N0) (upper, m >= a/2) and below it (lower)."""

    upper: tuple
    lower: tuple
    name: str = ""

    def __post_init__(self):
        if not self.upper or not self.lower:
            raise DomainError("each sub-region needs at least one strategy")


def bourgain_strategies() -> StrategySet:
    p = process_A(K0)
    return StrategySet((Strategy("first_use", p),), (Strategy("lemma7", p),), "bourgain")


def trudgian_yang_strategies() -> StrategySet:
    return StrategySet(
        (Strategy("first_use", K4), Strategy("first_use", K5)),
        (Strategy("type1", K4), Strategy("lemma7", process_A(K0)), Strategy("lemma7", process_A(K1))),
        "trudgian-yang",
    )


def hypothesis_strategies() -> StrategySet:
    # exponent pair hypothesis: (0, 1/2) and its A-image (0, 3/4)
    p = pair(0, Fraction(3, 4), provenance="A(0,1/2)")
    return StrategySet((Strategy("first_use", p),), (Strategy("lemma7", p),), "hypothesis")


@dataclass(frozen=True)
class CaseExponentReport:
    value: Fraction
    a: Fraction
    m: Fraction
    region: str
    per_strategy: dict = field(default_factory=dict)
    region_values: dict = field(default_factory=dict)

    @property
    def theta(self) -> Fraction:
        return Fraction(9, 8) + self.value


def _region_lines(region: str) -> list[Affine]:
    # boundary lines as c + ca a + cm m = 0
    lines = [(Fraction(0), Fraction(1), Fraction(0)),          # a = 0
             (-HALF, Fraction(1), Fraction(0)),                # a = 1/2
             (Fraction(0), Fraction(1), Fraction(-1)),         # m = a
             (Fraction(0), Fraction(1, 4), Fraction(-1)),      # m = a/4
             (Fraction(0), HALF, Fraction(-1))]                # m = a/2
    return lines


def _in_region(region: str, a, m) -> bool:
    if not (0 <= a <= HALF and a / 4 <= m <= a):
        return False
    return m >= a / 2 if region == "upper" else m <= a / 2


def _intersect(l1: Affine, l2: Affine):
    c1, a1, m1 = l1
    c2, a2, m2 = l2
    det = a1 * m2 - a2 * m1
    if det == 0:
        return None
    a = (-c1 * m2 + c2 * m1) / det
    m = (-a1 * c2 + a2 * c1) / det
    return a, m


def _objective(strats, a, m):
    return min(s.value(a, m) for s in strats)


def _region_optimum(strats, region):
    pieces = [b for s in strats for b in s.branches()]
    lines = list(_region_lines(region))
    for p, q in itertools.combinations(pieces, 2):
        d = tuple(x - y for x, y in zip(p, q))
        if d[1] != 0 or d[2] != 0:
            lines.append(d)
    best = None
    for l1, l2 in itertools.combinations(lines, 2):
        pt = _intersect(l1, l2)
        if pt is None or not _in_region(region, *pt):
            continue
        v = _objective(strats, *pt)
        if best is None or v > best[0] or (v == best[0] and pt < best[1:]):
            best = (v, *pt)
    return best


def minimax_critical_exponent(strategies: StrategySet) -> CaseExponentReport:
    """sup over the region of the min over strategies, exactly.

    Every strategy exponent is a max of affine forms, so the objective is
    continuous and piecewise affine; its maximum sits on a vertex of the
    arrangement formed by the region edges and all pairwise equality lines.
    """
    results = {r: _region_optimum(getattr(strategies, r), r) for r in ("upper", "lower")}
    region = max(results, key=lambda r: results[r][0])
    v, a, m = results[region]
    strats = getattr(strategies, region)
    return CaseExponentReport(
        value=v, a=a, m=m, region=region,
        per_strategy={s.label(): s.value(a, m) for s in strats},
        region_values={r: results[r][0] for r in results},
    )


def _grid_values(strats, region, a, m):
    vals = None
    for s in strats:
        br = [float(c) + float(ca) * a + float(cm) * m for c, ca, cm in s.branches()]
        sv = np.maximum.reduce(br) if len(br) > 1 else br[0]
        vals = sv if vals is None else np.minimum(vals, sv)
    ok = (m >= a / 4 - 1e-15) & (m <= a + 1e-15)
    ok &= (m >= a / 2 - 1e-15) if region == "upper" else (m <= a / 2 + 1e-15)
    return np.where(ok, vals, -np.inf)


def minimax_grid(strategies: StrategySet, step: float = 1e-3, final_step: float = 1e-10,
                 keep: int = 8) -> tuple[float, float, float]:
    """Floating cross-check: grid scan then repeated zooms around the best cells.

    Returns (value, a, m). A single uniform grid of step h only gets within
    about L*h of the optimum, so the grid is refined locally down to final_step.
    """
    best = (-np.inf, 0.0, 0.0)
    for region in ("upper", "lower"):
        strats = getattr(strategies, region)
        a = np.arange(0, 0.5 + step / 2, step)
        u = np.linspace(0.25, 1.0, int(round(0.75 / step)) + 1)
        A, U = np.meshgrid(a, u, indexing="ij")
        M = A * U
        V = _grid_values(strats, region, A, M)
        flat = np.argsort(V.ravel())[::-1][:keep]
        cands = [(V.ravel()[i], A.ravel()[i], M.ravel()[i]) for i in flat]
        h = step
        while h > final_step:
            new = []
            for _, ac, mc in cands:
                da = np.linspace(-h, h, 21)
                AA, MM = np.meshgrid(np.clip(ac + da, 0, 0.5), mc + da, indexing="ij")
                VV = _grid_values(strats, region, AA, MM)
                i = int(np.argmax(VV))
                new.append((VV.ravel()[i], AA.ravel()[i], MM.ravel()[i]))
            cands = sorted(new, reverse=True)[:keep]
            h /= 10
        if cands[0][0] > best[0]:
            best = cands[0]
    return float(best[0]), float(best[1]), float(best[2])


# ---------------------------------------------------------------------------
# Vinogradov-type bounds
# ---------------------------------------------------------------------------

def vinogradov_bound(M: float, F: float, alpha: float) -> float:
    """alpha M exp(-2^-18 (log M)^3 / (log F)^2), implied constant 1."""
    if not M >= 2 or not F >= M ** 4 or not alpha >= 1:
        raise DomainError("need M >= 2, F >= M^4, alpha >= 1")
    return alpha * M * math.exp(-2.0 ** -18 * math.log(M) ** 3 / math.log(F) ** 2)


def merged_bound(M0: float, x: float) -> float:
    """M0 exp(-2^-21 (log M0)^3 / (log x)^2)."""
    if not 1 <= M0 < x:
        raise DomainError("need 1 <= M0 < x")
    return M0 * math.exp(-2.0 ** -21 * math.log(M0) ** 3 / math.log(x) ** 2)


def _binom_third(j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= (Fraction(1, 3) - i) / (i + 1)
    return out


@dataclass(frozen=True)
class Lemma6Report:
    alpha: Fraction
    j_max: int
    worst_lower: float
    worst_upper: float
    ok: bool


def lemma6_hypothesis_check(alpha=Fraction(3, 2), j_max: int = 40) -> Lemma6Report:
    """Check alpha^-j^3 F <= u^j/j! |f^(j)(u)| <= alpha^j^3 F on [M, 2M] for f = 3 c u^(1/3).

    Here u^j/j! |f^(j)(u)| / F = 3 |C(1/3, j)| (u/M)^(1/3) with (u/M)^(1/3) in
    [1, 2^(1/3)], independent of c and M. Beyond j_max the lower side only
    gets easier (|C(1/3, j)| decays like j^-4/3, alpha^-j^3 much faster) and
    the upper side holds since 3|C(1/3, j)| <= 1.
    """
    alpha = as_fraction(alpha)
    lo_margin, hi_margin = math.inf, math.inf
    ok = True
    cube2 = 2 ** (1 / 3)
    for j in range(1, j_max + 1):
        b = 3 * abs(_binom_third(j))
        # exact on the lower edge: 3|C| >= alpha^-j^3  <=>  3|C| alpha^j^3 >= 1
        ok &= b * alpha ** (j ** 3) >= 1
        lo = math.log(b.numerator) - math.log(b.denominator) + j ** 3 * math.log(alpha)
        hi = j ** 3 * math.log(alpha) - math.log(b.numerator) + math.log(b.denominator) - math.log(cube2)
        ok &= hi >= 0
        lo_margin, hi_margin = min(lo_margin, lo), min(hi_margin, hi)
    return Lemma6Report(alpha, j_max, lo_margin, hi_margin, bool(ok))


# ---------------------------------------------------------------------------
# direct sums
# ---------------------------------------------------------------------------

def sum_S3_direct(x: float, N: int, table: DivisorTable) -> float:
    """sum_{n<=N} d_3(n)/n cos(6 pi (n x)^(1/3) + 3 pi/2)."""
    if table.k != 3 or N > table.limit or N < 0:
        raise DomainError("need a k = 3 table covering N")
    return cosine_sum(3, x, N, table, 1.0)


def sum_S4_direct(x: float, N: int, table: DivisorTable) -> float:
    """sum_{n<=N} d_4(n)/n^(7/8) cos(8 pi (n x)^(1/4) + 7 pi/4)."""
    if table.k != 4 or N > table.limit or N < 0:
        raise DomainError("need a k = 4 table covering N")
    return cosine_sum(4, x, N, table, 0.875)


def exp_sum_probe(x: float, n1: int, n2: int, M: int) -> float:
    """|sum_{M < n <= 2M} e(3 (x n1 n2 n)^(1/3))|.

    Phases come from the integer cube-root split in root_fraction, which
    keeps them accurate well past x n1 n2 M = 1e12.
    """
    if M < 1 or n1 < 1 or n2 < 1 or not x >= 1:
        raise DomainError("need M, n1, n2 >= 1 and x >= 1")
    n = np.arange(M + 1, 2 * M + 1, dtype=np.int64)
    frac = root_fraction(n, x * n1 * n2, 3)
    z = np.exp(2j * math.pi * 3 * frac)
    return abs(complex(math.fsum(z.real), math.fsum(z.imag)))


def pair_bound(p: ExponentPair, M: float, F: float) -> float:
    """M^lambda (F/M)^kappa."""
    return M ** float(p.lam) * (F / M) ** float(p.kappa)
