#!/usr/bin/env python3
"""Coverage-vs-modulus sweep for a fixed subgroup order.

For each prime q = 1 (mod d) below the bound, pick a generator of order d
and measure how much of the torus-map image the period set covers at
several epsilons. Shows the fill-out trend as q grows.

Usage: python scripts/fillout_sweep.py [--d 3] [--qmax 20000] [--samples 200000]
"""

import argparse
import sys

from gaussianperiods import compute_period_set, coverage, laurent_map
from gaussianperiods.numtheory import is_prime, multiplicative_order


def order_d_generator(q: int, d: int) -> int | None:
    """Smallest element of exact order d mod prime q, if any."""
    if (q - 1) % d != 0:
        return None
    for x in range(2, q):
        w = pow(x, (q - 1) // d, q)
        if w != 1 and multiplicative_order(w, q) == d:
            return w
    return None


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--qmin", type=int, default=100)
    parser.add_argument("--qmax", type=int, default=20000)
    parser.add_argument("--steps", type=int, default=8)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--epsilons", default="0.02,0.05,0.10")
    args = parser.parse_args()

    epsilons = [float(e) for e in args.epsilons.split(",")]
    lmap = laurent_map(args.d)

    # geometric ladder of primes with q = 1 mod d
    targets = [
        int(args.qmin * (args.qmax / args.qmin) ** (i / (args.steps - 1)))
        for i in range(args.steps)
    ]
    chosen = []
    for t in targets:
        q = t
        while not (is_prime(q) and (q - 1) % args.d == 0):
            q += 1
        if q not in [c[0] for c in chosen]:
            chosen.append((q, order_d_generator(q, args.d)))

    header = "q      omega  points  max_pt_dist " + " ".join(f"frac@{e}" for e in epsilons)
    print(header)
    for q, omega in chosen:
        pset = compute_period_set(q, omega, 1)
        row = None
        fracs = []
        for eps in epsilons:
            rep = coverage(pset, lmap, epsilon=eps, sample_count=args.samples)
            fracs.append(rep.fraction_covered)
            row = rep
        print(
            f"{q:<6d} {omega:<6d} {len(pset.reps):<7d} {row.max_point_distance:<11.4g} "
            + " ".join(f"{f:<8.4f}" for f in fracs)
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
