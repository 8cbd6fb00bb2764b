"""Normalized residuals of the truncated sum formula on a log grid of x."""
import argparse
import math

import numpy as np

from piltz.divisor_core import build_divisor_table
from piltz.records import records_to_csv
from piltz.voronoi_contour import VoronoiParams, thm2_residual


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--xmax", type=float, default=1e6)
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--eta", type=float, default=0.01)
    args = ap.parse_args()
    xmax = int(args.xmax)
    table = build_divisor_table(args.k, xmax)
    recs = []
    for x in np.geomspace(100, xmax, args.points):
        N = int(x) if args.k == 3 else math.isqrt(int(x))
        recs.append(thm2_residual(VoronoiParams(args.k, float(x), N, eta=args.eta), table))
    print(records_to_csv(recs), end="")


if __name__ == "__main__":
    main()
