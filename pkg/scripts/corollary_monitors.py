"""|sum Delta_3|/(x log^3 x) and |int Delta_3|/(x log^(8/3) x) along a log grid."""
import argparse
import math

import numpy as np

from piltz.divisor_core import build_divisor_table, integral_delta, sum_delta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--xmax", type=float, default=1e7)
    ap.add_argument("--points", type=int, default=30)
    args = ap.parse_args()
    table = build_divisor_table(3, int(args.xmax))
    peak_s = peak_i = 0.0
    print("x sum_ratio integral_ratio")
    for x in np.geomspace(100, args.xmax, args.points):
        L = math.log(x)
        s = abs(sum_delta(table, x)) / (x * L ** 3)
        i = abs(integral_delta(table, x)) / (x * L ** (8 / 3))
        peak_s, peak_i = max(peak_s, s), max(peak_i, i)
        print(f"{x:.6g} {s:.5g} {i:.5g}")
    flag = "ok" if s <= 1.5 * peak_s and i <= 1.5 * peak_i else "REVIEW"
    print(f"# final vs peak: sum {s / peak_s:.3f}, integral {i / peak_i:.3f} -> {flag}")


if __name__ == "__main__":
    main()
