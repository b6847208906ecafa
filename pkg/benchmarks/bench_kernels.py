"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Reports the best-of-N wall time of each workload under each available
backend. The delta LP rows run the full column-generation solve, so they show
what the pivot kernel is worth end to end.
"""

import argparse
import time

import numpy as np

from zerocert import geometry as geo
from zerocert import kernels
from zerocert.delta import delta_lower_lp


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def pivot_workload(rows, cols, n_pivots=50):
    rng = np.random.default_rng(0)
    T0 = rng.standard_normal((rows, cols))

    def go():
        T = T0.copy()
        for k in range(n_pivots):
            kernels.pivot(T, k % rows, k % cols)
    return go


def power_workload(n, reps=200):
    rng = np.random.default_rng(1)
    M = rng.standard_normal((n, n))
    G = M.T @ M
    x0 = rng.standard_normal(n)

    def go():
        for _ in range(reps):
            kernels.power_iteration(G, x0, 1e-10, 100_000)
    return go


def delta_workload(body, resolution):
    grid = geo.sample(body, resolution)
    return lambda: delta_lower_lp(body, grid)


WORKLOADS = [
    ("pivot 100x300 (x50)", pivot_workload(100, 300)),
    ("pivot 400x1500 (x50)", pivot_workload(400, 1500)),
    ("power iteration 2x2 (x200)", power_workload(2)),
    ("power iteration 3x3 (x200)", power_workload(3)),
    ("delta LP triangle r=8", delta_workload(geo.Polytope([[0, 0], [1, 0], [0.5, 3 ** 0.5 / 2]]), 8)),
    ("delta LP square r=8", delta_workload(geo.Polytope([[0, 0], [1, 0], [1, 1], [0, 1]]), 8)),
    ("delta LP tetrahedron r=3", delta_workload(geo.Polytope(np.vstack([np.zeros(3), np.eye(3)])), 3)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    prev = kernels.backend_name()
    print(f"{'workload':<30}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    try:
        for name, fn in WORKLOADS:
            times = {}
            for b in backends:
                kernels.use_backend(b)
                times[b] = best_time(fn, args.repeat)
            row = f"{name:<30}" + "".join(f"{times[b]:>11.4f}s" for b in backends)
            if "compiled" in times:
                row += f"{times['python'] / times['compiled']:>9.2f}x"
            print(row)
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
