"""Scan how strongly the two negative controls break the suite.

The spin-operator sabotage replaces Pi_z by Sigma_z in the even part. Its residuals grow
with mu' H, so the scan shows where they cross 1e-3. The perturbation control adds a
seeded random Hermitian matrix of a given max-norm.
"""
import argparse
import sys
import warnings

from fwlab import ModelParams
from fwlab.verification import run_suite

SABOTAGE_CHECKS = ("exactness_commutator", "connection_lower_spinor", "connection_upper_factor")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=32)
    args = ap.parse_args(argv)

    print("sabotage (Pi -> Sigma)")
    print(f"{'H':>6} {'mu_prime':>9} " + " ".join(f"{c:>24}" for c in SABOTAGE_CHECKS))
    for H in (0.1, 0.5):
        for mu in (1e-3, 1e-2, 5e-2):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                reps = {r.check_name: r for r in run_suite(ModelParams(1.0, 1.0, H, mu, args.n_max),
                                                          spin_operator="sigma", radial=False)}
            print(f"{H:6g} {mu:9g} " + " ".join(f"{reps[c].max_residual:24.3e}" for c in SABOTAGE_CHECKS))

    print("\nrandom Hermitian perturbation at default parameters")
    for scale in (1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-3):
        rep = {r.check_name: r for r in run_suite(ModelParams(n_max=args.n_max), perturbation=scale,
                                                  radial=False)}["spectrum_identity"]
        print(f"  scale {scale:8.0e}: spectrum residual {rep.max_residual:.3e} "
              f"({'pass' if rep.passed else 'FAIL'})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
