"""Print the T-duality matrix in both charge frames and how it compares with the block matrix."""

import argparse

from fmcalc import charges as ch
from fmcalc.geometry import build_fibration


def show(M):
    for row in M:
        print("   " + " ".join(f"{str(v):>6s}" for v in row))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", default="P2")
    args = ap.parse_args()
    X = build_fibration(args.base)
    for frame in (ch.EFFECTIVE, ch.ADIABATIC):
        rep = ch.tduality_matrix(X, frame)
        print(f"{frame} frame on {args.base}")
        show(rep.matrix)
        print(f"  x=0 columns match: {rep.x0_columns_match}")
        print(f"  full match:        {rep.full_match}")
        print(f"  T^2 = -1:          {rep.squares_to_minus_identity}")
        print()


if __name__ == "__main__":
    main()
