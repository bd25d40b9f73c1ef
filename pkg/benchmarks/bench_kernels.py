"""Timing comparison of the pure-Python and compiled kernels.

Usage: python benchmarks/bench_kernels.py [--sizes 20 50 100] [--repeats 5]
"""
import argparse
import time

import numpy as np

from instance_forge._kernels import HAVE_COMPILED, pure
from instance_forge.instances import RandomSource, distance_matrix, random_instance

if HAVE_COMPILED:
    from instance_forge._kernels import _core
else:
    _core = None


def best_of(repeats, fn, *args):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(mod, sizes, hk_sizes, repeats, rng):
    rows = {}
    for n in sizes:
        inst = random_instance(n, rng.child(n))
        dist = distance_matrix(inst.coords)
        order = rng.child(n, 1).permutation(n)
        rows[("tour_length", n)] = best_of(repeats * 10, mod.tour_length, dist, order)
        rows[("two_opt", n)] = best_of(repeats, mod.two_opt, dist, order)
    for n in hk_sizes:
        inst = random_instance(n, rng.child(n, 2))
        dist = distance_matrix(inst.coords)
        rows[("held_karp", n)] = best_of(repeats, mod.held_karp, dist)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    parser.add_argument("--hk-sizes", type=int, nargs="+", default=[10, 13, 15])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = RandomSource(args.seed)
    pure_rows = bench_backend(pure, args.sizes, args.hk_sizes, args.repeats, rng)
    if _core is None:
        print("compiled backend not available; showing pure timings only\n")
        comp_rows = None
    else:
        comp_rows = bench_backend(_core, args.sizes, args.hk_sizes, args.repeats, rng)

    header = f"{'kernel':<12} {'n':>5} {'pure [ms]':>12}"
    if comp_rows is not None:
        header += f" {'compiled [ms]':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for key in sorted(pure_rows, key=lambda k: (k[0], k[1])):
        name, n = key
        p = pure_rows[key] * 1e3
        line = f"{name:<12} {n:>5} {p:>12.3f}"
        if comp_rows is not None:
            c = comp_rows[key] * 1e3
            line += f" {c:>14.3f} {p / c:>8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
