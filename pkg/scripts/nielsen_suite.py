"""Random Nielsen suite: decide, synthesize and simulate LOCC conversions.

    python3 scripts/nielsen_suite.py --pairs 1000 --dims 2 3 4 5 6
"""
import argparse
import time

import numpy as np

from majorization.locc import (
    locc_convertible,
    schmidt_decompose,
    simulate_protocol,
    synthesize_nielsen_protocol,
)


def random_pure(d, rng):
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return schmidt_decompose((M / np.linalg.norm(M)).ravel(), d, d)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print("d,pairs,convertible,min_fidelity,max_prob_error,max_residual,seconds")
    for d in args.dims:
        t0 = time.perf_counter()
        conv, fid, perr, res = 0, 1.0, 0.0, 0.0
        for _ in range(args.pairs):
            psi, phi = random_pure(d, rng), random_pure(d, rng)
            if not locc_convertible(psi, phi):
                continue
            conv += 1
            P = synthesize_nielsen_protocol(psi, phi)
            sim = simulate_protocol(psi, P)
            fid = min(fid, min(sim.fidelities(phi)))
            perr = max(perr, abs(sim.total_probability - 1))
            res = max(res, max(P.completeness_residuals()))
        print(f"{d},{args.pairs},{conv},{fid:.15f},{perr:.2e},{res:.2e},{time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
