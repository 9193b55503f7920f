"""Probability that a random balanced +-1 matrix of side 2^(n/2) is nonsingular, n = 2..16.

Writes a CSV (default stdout).  n = 14 and 16 use 128x128 and 256x256
matrices, so keep --samples modest there.
"""

import argparse
import sys
import time

from tscomplex.cli import main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12, 14, 16])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    argv = ["figure-probe2", "--n", *map(str, args.n), "--samples", str(args.samples), "--seed", str(args.seed)]
    if args.out:
        argv = ["--out", args.out] + argv
    t0 = time.perf_counter()
    rc = main(argv)
    print(f"done in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    raise SystemExit(rc)
