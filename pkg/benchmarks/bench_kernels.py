#!/usr/bin/env python3
"""Benchmark the compiled row-reduction kernel against the pure fallback.

The elimination kernel backs every singular-vector search, torsion split and
decomposition audit, so this is the one hot loop worth compiling. Matrices are
random rationals with bounded numerators/denominators (seeded), which is the
regime the library produces: small entries whose intermediate values grow.

Usage: python3 benchmarks/bench_kernels.py [--sizes 40x60,80x100] [--repeats 3]
"""

import argparse
import random
import time
from fractions import Fraction

from imverma._kernels import pyref

try:
    from imverma._kernels import _speedups
except ImportError:
    _speedups = None


def random_matrix(rng, m, n, den_max=9):
    return [[Fraction(rng.randint(-50, 50), rng.randint(1, den_max))
             for _ in range(n)] for _ in range(m)]


def time_backend(impl, mats, repeats):
    best = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a in mats:
            impl.rref(a)
            impl.nullspace(a, len(a[0]))
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="20x30,40x60,60x90")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--matrices", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print(f"{'size':>10} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for size in args.sizes.split(","):
        m, n = (int(x) for x in size.lower().split("x"))
        mats = [random_matrix(rng, m, n) for _ in range(args.matrices)]
        t_py = time_backend(pyref, mats, args.repeats)
        if _speedups is None:
            print(f"{size:>10} {t_py:>10.3f} {'(not built)':>13} {'-':>8}")
            continue
        t_cy = time_backend(_speedups, mats, args.repeats)
        for a in mats:  # outputs must agree bitwise
            assert pyref.rref(a) == _speedups.rref(a)
        print(f"{size:>10} {t_py:>10.3f} {t_cy:>13.3f} {t_py / t_cy:>8.2f}x")


if __name__ == "__main__":
    main()
