#!/usr/bin/env python3
"""Benchmark the trajectory recursion kernels: compiled extension vs the
numpy fallback.

Usage: python benchmarks/kernel_bench.py [--steps N] [--dims P] [--repeat K]
"""

import argparse
import time

import numpy as np

from ctsysid import _kernel_py

try:
    from ctsysid import _kernel_cy
except ImportError:
    _kernel_cy = None


def bench(kernel, step_matrix, drive, x0, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        kernel.linear_recursion(step_matrix, drive, x0, 1e12)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=50_000)
    parser.add_argument("--dims", type=int, nargs="*", default=[1, 3, 10, 30])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"{'p':>4} {'steps':>8} {'python':>12} {'cython':>12} {'speedup':>9}")
    for p in args.dims:
        rng = np.random.default_rng(p)
        # mildly contractive so no run truncates and step counts compare
        step_matrix = 1e-3 * (rng.standard_normal((p, p)) / np.sqrt(p) - 0.5 * np.eye(p))
        drive = 0.03 * rng.standard_normal((args.steps, p))
        x0 = rng.standard_normal(p)

        t_py = bench(_kernel_py, step_matrix, drive, x0, args.repeat)
        if _kernel_cy is not None:
            t_cy = bench(_kernel_cy, step_matrix, drive, x0, args.repeat)
            ratio = t_py / t_cy
            print(
                f"{p:>4} {args.steps:>8} {t_py * 1e3:>10.1f}ms {t_cy * 1e3:>10.1f}ms {ratio:>8.1f}x"
            )
        else:
            print(f"{p:>4} {args.steps:>8} {t_py * 1e3:>10.1f}ms {'(absent)':>12} {'-':>9}")


if __name__ == "__main__":
    main()
