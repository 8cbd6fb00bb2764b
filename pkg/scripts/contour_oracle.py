"""Perron line integral on Re s = -delta against the finite cosine series, over a small (x, N) grid."""
from piltz.divisor_core import build_divisor_table
from piltz.voronoi_contour import VoronoiParams, lemma5_check


def main():
    tables = {k: build_divisor_table(k, 100) for k in (3, 4)}
    print("k x N lhs rhs |res|/(x^5/6 N^1/6) |res|/envelope")
    for k in (3, 4):
        for x, N in ((50, 5), (100, 8), (200, 10), (400, 16), (800, 20)):
            r = lemma5_check(VoronoiParams(k, x, N), tables[k])
            crit = abs(r.residual) / (x ** (5 / 6) * N ** (1 / 6))
            print(f"{k} {x} {N} {r.lhs:.10g} {r.rhs:.10g} {crit:.4g} {abs(r.normalized_residual):.4g}")


if __name__ == "__main__":
    main()
