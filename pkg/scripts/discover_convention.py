"""Search the sign and e^{k c1} twist that makes the four-factor composition match the transform."""

import argparse

from fmcalc.fm import FACTORIZATION_CONVENTION, discover_factorization_convention
from fmcalc.geometry import build_fibration, catalog_names


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("bases", nargs="*", help="catalog names (default: all)")
    args = ap.parse_args()
    names = args.bases or catalog_names()
    for name in names:
        found = discover_factorization_convention(build_fibration(name))
        mark = "" if found == FACTORIZATION_CONVENTION else "  <-- differs from the built-in convention"
        print(f"{name:6s} {found}{mark}")


if __name__ == "__main__":
    main()
