"""CHSH seesaw values on n Powers pairs, next to the closed form for one pair.

    python3 scripts/chsh_powers.py --lambdas 0 0.25 0.5 1 --n-max 3
"""
import argparse
import math

from majorization.itpfi import PowersModel, chsh_seesaw_pure, powers_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.0, 0.25, 0.5, 1.0])
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("lambda,n,beta,single_pair_closed_form")
    for lam in args.lambdas:
        closed = 2 * math.sqrt(1 + 4 * lam / (1 + lam) ** 2)
        for n in range(1, args.n_max + 1):
            beta = chsh_seesaw_pure(powers_state(PowersModel(lam, n)), restarts=args.restarts, seed=args.seed).beta
            print(f"{lam:g},{n},{beta:.10f},{closed:.10f}")


if __name__ == "__main__":
    main()
