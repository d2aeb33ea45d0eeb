"""Finite-difference error of the lowest radial states versus grid size."""
import argparse
import sys

from fwlab import ModelParams
from fwlab.verification import check_radial_states


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--H", type=float, default=0.1)
    ap.add_argument("--e", type=float, default=1.0)
    ap.add_argument("--points", type=int, nargs="+", default=[500, 1000, 2000, 4000, 8000])
    args = ap.parse_args(argv)

    p = ModelParams(e=args.e, H=args.H)
    for pts in args.points:
        checks = check_radial_states(p, count=5, points=pts)
        worst = max(checks, key=lambda c: c.fd_rel_error)
        print(f"points={pts:6d}  max FD rel err {worst.fd_rel_error:.3e} (n={worst.n}, lambda={worst.lam}, "
              f"M={worst.M:+g})  max norm err {max(c.norm_error for c in checks):.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
