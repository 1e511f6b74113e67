"""Compiled vs pure-Python counting kernels.

    python benchmarks/bench_kernels.py --n 1000,10000,100000 --repeat 3

Prints one row per (n, kernel) with the best time of each backend and the
speedup. Both backends must return the same integer before anything is timed.
"""

import argparse
import time

import numpy as np

from rankcorr import kernels

KERNELS = ("concordant_count", "weighted_t")


def best_of(fn, ranks, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(ranks, backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(args.seed)
    sizes = [int(float(s)) for s in args.n.split(",")]

    print(f"{'n':>9} {'kernel':>17} " + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")
    for n in sizes:
        ranks = rng.permutation(n).astype(np.int64) + 1
        for name in KERNELS:
            fn = getattr(kernels, name)
            results = {b: fn(ranks, b) for b in backends}
            if len(set(results.values())) != 1:
                raise SystemExit(f"backends disagree on {name} at n={n}: {results}")
            times = {b: best_of(fn, ranks, b, args.repeat) for b in backends}
            speedup = times["python"] / times["compiled"] if "compiled" in times else 1.0
            cells = " ".join(f"{times[b]:>12.3e}" for b in backends)
            print(f"{n:>9} {name:>17} {cells} {speedup:>8.1f}x")


if __name__ == "__main__":
    main()
