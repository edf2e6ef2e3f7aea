#!/usr/bin/env python3
"""Benchmark the zonal series kernel: compiled extension vs numpy fallback.

The kernel evaluates m truncated Legendre series (values and derivatives)
at n points, the hot inner loop of the error norms in the convergence
studies.  Representative production size: m = 3 powers, j_max = 10000
modes, n ~ 2e5 quadrature points per refinement level.

Usage:
    python benchmarks/bench_series.py [--points N] [--modes J] [--series M]
"""

import argparse
import time

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=50000)
    parser.add_argument("--modes", type=int, default=10000)
    parser.add_argument("--series", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    from fracsurf import _zonal_np

    try:
        from fracsurf import _zonal
    except ImportError:
        _zonal = None

    rng = np.random.default_rng(0)
    coeffs = rng.normal(size=(args.series, args.modes + 1)) / np.arange(
        1, args.modes + 2
    )
    t = rng.uniform(-1.0, 1.0, size=args.points)

    backends = [("numpy fallback", _zonal_np.zonal_sums)]
    if _zonal is not None:
        backends.insert(0, ("compiled", _zonal.zonal_sums))
    else:
        print("compiled kernel not available; benchmarking the fallback only")

    results = {}
    for name, fn in backends:
        best = float("inf")
        for _ in range(args.repeats):
            start = time.perf_counter()
            out = fn(coeffs, t)
            best = min(best, time.perf_counter() - start)
        results[name] = (best, out)
        terms = args.points * (args.modes + 1)
        print(f"{name:16s} {best:8.3f} s   ({terms / best / 1e9:.2f} G term-evals/s)")

    if len(results) == 2:
        fast, slow = results["compiled"], results["numpy fallback"]
        print(f"speedup: {slow[0] / fast[0]:.1f}x")
        diff = max(
            float(np.abs(fast[1][0] - slow[1][0]).max()),
            float(np.abs(fast[1][1] - slow[1][1]).max()),
        )
        print(f"max |compiled - fallback|: {diff:.3e}")


if __name__ == "__main__":
    main()
