#!/usr/bin/env python3
"""Benchmark the compiled meridian kernel against the numpy fallback.

The per-point signed-residual kernel sits inside the fitting objective and
dominates fit runtime, so both backends are timed on identical batches and
checked for agreement.

Usage: python benchmarks/bench_kernels.py [--n 1000] [--repeat 200]
"""

import argparse
import time

import numpy as np

from supertoroid import _kernels_np
from supertoroid.geometry import Intrinsics

try:
    from supertoroid import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def _best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(n: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    i = Intrinsics(1.0, 0.8, 0.5, 2.5, 0.9, 1.3)
    pts = rng.uniform(-4.0, 4.0, size=(n, 3))
    args = (pts, i.a1, i.a2, i.a3, i.a4, i.eps1, i.eps2, 1e-9)

    ref, _ = _kernels_np.meridian_residuals(*args)
    t_np = _best_time(lambda: _kernels_np.meridian_residuals(*args), repeat)
    print(f"{'backend':<10} {'best time':>12} {'points/s':>14}")
    print(f"{'python':<10} {t_np * 1e6:>10.1f}us {n / t_np:>14.3g}")

    if _kernels_cy is None:
        print("cython     (extension not built)")
        return
    out, _ = _kernels_cy.meridian_residuals(*args)
    max_diff = float(np.max(np.abs(out - ref)))
    t_cy = _best_time(lambda: _kernels_cy.meridian_residuals(*args), repeat)
    print(f"{'cython':<10} {t_cy * 1e6:>10.1f}us {n / t_cy:>14.3g}")
    print(f"speedup: {t_np / t_cy:.2f}x   max |diff|: {max_diff:.3g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000,
                    help="points per batch (fit stage 2 uses 1000)")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    run(args.n, args.repeat)
