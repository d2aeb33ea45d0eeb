"""Run the verification suite over a parameter grid and write one row per (point, check)."""
import argparse
import csv
import itertools
import sys
import time

from fwlab import ModelParams
from fwlab.verification import run_suite


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, nargs="+", default=[16, 64])
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    rows, worst = [], {}
    for m, e, H, mu, n_max in itertools.product([0.5, 1.0], [-1.0, 1.0], [0.05, 0.1, 0.5], [0.0, 1e-3], args.n_max):
        p = ModelParams(m, e, H, mu, n_max)
        t0 = time.perf_counter()
        reports = run_suite(p)
        elapsed = time.perf_counter() - t0
        for r in reports:
            rows.append([m, e, H, mu, n_max, r.check_name, repr(r.max_residual), repr(r.tolerance), r.passed])
            worst[r.check_name] = max(worst.get(r.check_name, 0.0), r.max_residual / r.tolerance)
        print(f"m={m} e={e} H={H} mu'={mu} n_max={n_max}: {sum(r.passed for r in reports)}/{len(reports)} "
              f"passed in {elapsed:.2f}s", file=sys.stderr)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["m", "e", "H", "mu_prime", "n_max", "check", "max_residual", "tolerance", "passed"])
    writer.writerows(rows)
    if fh is not sys.stdout:
        fh.close()

    print("\nworst residual / tolerance per check:", file=sys.stderr)
    for name, ratio in sorted(worst.items(), key=lambda kv: -kv[1]):
        print(f"  {name:32s} {ratio:.3e}", file=sys.stderr)
    return 0 if all(r[-1] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
