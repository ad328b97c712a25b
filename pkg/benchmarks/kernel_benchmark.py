#!/usr/bin/env python3
"""Time the per-face mesh kernels on every importable backend.

Runs the three hot kernels (vertex_geometry, energy_value, energy_gradient)
on icospheres of increasing size and prints the best per-call time for the
numpy backend and, when built, the Cython backend, with the speedup.

Usage:
    python benchmarks/kernel_benchmark.py [--subdiv 3 4 5] [--reps 30]
"""

import argparse
import time

from helfrich_lab._kernels import get_backends
from helfrich_lab.mesh import make_icosphere

PARAMS = (1.0, 0.5, 1.0, -1.0)  # kc, c0, lam, p


def best_time(fn, reps: int) -> float:
    fn()  # warm-up, excluded
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--subdiv", type=int, nargs="+", default=[3, 4, 5],
                    help="icosphere subdivision levels to test")
    ap.add_argument("--reps", type=int, default=30,
                    help="repetitions per kernel (best time is reported)")
    args = ap.parse_args()

    backends = get_backends()
    names = list(backends)
    if "cython" not in backends:
        print("note: compiled backend not importable, timing numpy only")

    for subdiv in args.subdiv:
        mesh = make_icosphere(subdiv)
        X, F = mesh.vertices, mesh.faces
        print(f"\nsubdiv {subdiv}: {len(X)} vertices, {len(F)} faces")
        header = f"  {'kernel':<18}" + "".join(f"{n:>12}" for n in names)
        if len(names) == 2:
            header += f"{'speedup':>10}"
        print(header)
        for kernel in ("vertex_geometry", "energy_value", "energy_gradient"):
            times = {}
            for name, module in backends.items():
                fn = getattr(module, kernel)
                if kernel == "vertex_geometry":
                    call = lambda: fn(X, F)
                else:
                    call = lambda: fn(X, F, *PARAMS)
                times[name] = best_time(call, args.reps)
            row = f"  {kernel:<18}" + "".join(
                f"{times[n] * 1e3:>10.3f}ms" for n in names
            )
            if len(names) == 2:
                row += f"{times['numpy'] / times['cython']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
