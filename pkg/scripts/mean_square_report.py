"""Mean square of V_k against the leading term, for the full and the truncated series constant."""
import argparse

from piltz.divisor_core import build_divisor_table
from piltz.meansquare import (fit_leading_coefficient, leading_denominator, mean_square_V,
                              partial_series, series_constant)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--skip-k3", action="store_true", help="skip the slow k=3, X=1e5 run")
    args = ap.parse_args()
    runs = [(4, 1e4, 1000)] if args.skip_k3 else [(3, 1e5, 1000), (4, 1e4, 1000)]
    for k, X, N in runs:
        table = build_divisor_table(k, N)
        r = mean_square_V(k, X, N, table)
        full = series_constant(k).value
        part = partial_series(table, N)
        trunc = r.leading_term() * part / full
        print(f"k={k} X={X:g} N={N}: {r.value:.6e}  (halving err {r.halving_error:.1e}, {r.panels} panels)")
        print(f"  vs C_k term  {r.leading_term():.6e}  dev {100 * r.relative_deviation():+.2f}%  C_k={full:.6f}")
        print(f"  vs truncated {trunc:.6e}  dev {100 * (r.value / trunc - 1):+.2f}%  sum_(n<=N)={part:.6f}")
    fit = fit_leading_coefficient(build_divisor_table(3, 10 ** 6))
    base = series_constant(3).value / leading_denominator(3)
    print(f"second moment k=3: fitted c={fit.coefficient:.7f}, d={fit.correction:.4f}, "
          f"c - C3/(72 pi^4) = {fit.coefficient - base:.7f} vs 1/192 = {1 / 192:.7f}")


if __name__ == "__main__":
    main()
