#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-Python RK4 kernels.

Usage: python benchmarks/benchmark_backends.py [--steps N]
"""

import argparse
import time

import numpy as np

from mapchaos.backend import HAVE_COMPILED, get_kernels
from mapchaos.model import ModelParams


def time_backend(kernels, name, steps):
    p = ModelParams()
    c = p.kernel_coeffs()
    results = {}

    y = np.array([7.48, 0.0, 0.0, 0.0, np.sqrt(3.0), 0.0, 1.0, 0.0])
    e0 = kernels.energy_mapping(y, c)
    t0 = time.perf_counter()
    status, done, drift = kernels.advance_mapping(y, 5e-5, steps, c, e0, -1.0, 8)
    dt_map = time.perf_counter() - t0
    assert status == 0, "mapping benchmark trajectory failed"
    results["mapping"] = steps / dt_map

    ya = np.array([7.48, 0.0, 0.0, 0.0])
    ea = kernels.energy_adiabatic(ya, c)
    t0 = time.perf_counter()
    status, done, drift = kernels.advance_adiabatic(ya, 5e-4, steps, c, ea, -1.0, 8)
    dt_ad = time.perf_counter() - t0
    assert status == 0, "adiabatic benchmark trajectory failed"
    results["adiabatic"] = steps / dt_ad

    for system, rate in results.items():
        print(f"{name:>8s}  {system:>9s}: {rate / 1e6:8.3f} Msteps/s")
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=200_000,
                        help="RK4 steps per timed run (default 200k)")
    args = parser.parse_args()

    # the pure backend is slow; keep its workload proportionate
    pure_steps = max(1000, args.steps // 100)

    print(f"compiled extension available: {HAVE_COMPILED}")
    pure = time_backend(get_kernels("python"), "python", pure_steps)
    if HAVE_COMPILED:
        comp = time_backend(get_kernels("compiled"), "compiled", args.steps)
        for system in ("mapping", "adiabatic"):
            print(f"speedup  {system:>9s}: {comp[system] / pure[system]:8.1f}x")


if __name__ == "__main__":
    main()
