"""Invertibility probability of both halves of the Jacobsthal matrix (I|Q) over random equal bipartitions."""

import argparse
import sys

from tscomplex.raz import estimate_subgroup_invertibility
from tscomplex.subgroup import jacobsthal_subgroup, is_prime


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--qmax", type=int, default=200, help="largest prime q = 3 mod 8 to include")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    qs = [q for q in range(3, args.qmax + 1) if q % 8 == 3 and is_prime(q)]
    print("q,n,p_hat,ci_low,ci_high")
    for q in qs:
        r = estimate_subgroup_invertibility(jacobsthal_subgroup(q), args.samples, seed=args.seed + q)
        print(f"{q},{2 * q},{r.p_hat:.4f},{r.ci_low:.4f},{r.ci_high:.4f}")
        sys.stdout.flush()
