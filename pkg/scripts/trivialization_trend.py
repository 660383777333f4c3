"""LOCC conversion fidelity |11> -> Bell with n Powers pairs as catalyst.

Prints a CSV with one column per lambda, for the chosen catalyst mode.

    python3 scripts/trivialization_trend.py --lambdas 0 0.3 0.5 1 --n-max 20
"""
import argparse
import csv
import sys

from majorization.itpfi import CATALYST_MODES, trivialization_trend
from majorization.stepfn import StepFunction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.0, 0.3, 0.5, 1.0])
    ap.add_argument("--n-max", type=int, default=20)
    ap.add_argument("--catalyst", choices=CATALYST_MODES, default="best")
    args = ap.parse_args()

    point, bell = StepFunction.flat(1.0, 1.0), StepFunction.flat(0.5, 2.0)
    ns = range(args.n_max + 1)
    cols = {lam: trivialization_trend(lam, point, bell, ns, args.catalyst) for lam in args.lambdas}
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n"] + [f"lambda={lam:g}" for lam in args.lambdas])
    for i, n in enumerate(ns):
        w.writerow([n] + [f"{cols[lam][i].fidelity:.12f}" for lam in args.lambdas])


if __name__ == "__main__":
    main()
