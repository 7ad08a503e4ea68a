"""Scan SU(n) spectral-cover models on a base and tabulate the anomaly-free ones."""

import argparse
from fractions import Fraction

from fmcalc.geometry import build_fibration
from fmcalc.spectral import scan_models


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", default="P2")
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--eta-max", type=int, default=36)
    ap.add_argument("--target", type=int, help="keep only this number of generations")
    ap.add_argument("--parallel", type=int, default=0)
    args = ap.parse_args()

    X = build_fibration(args.base)
    lams = [Fraction(k, 2) for k in (-3, -1, 1, 3)]
    ranges = [range(0, args.eta_max + 1)] + [range(0, 4)] * (X.base.h11 - 1)
    rows = scan_models(X, args.n, ranges, lams, target_n_gen=args.target, parallel=args.parallel, base_spec=args.base)
    print(f"{'n':>2} {'eta':>12} {'lam':>5} {'c3':>6} {'N_gen':>6} {'W_B':>12} {'a_f':>8}  flags")
    for r in rows:
        eta = ",".join(str(v) for v in r.eta)
        wb = ",".join(str(v) for v in r.W_B)
        print(f"{r.n:>2} {eta:>12} {str(r.lam):>5} {str(r.c3):>6} {str(r.n_gen):>6} {wb:>12} {str(r.a_f):>8}  {' '.join(r.flags)}")
    print(f"{len(rows)} models")


if __name__ == "__main__":
    main()
