#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-Python classical-map kernels.

Run after installing the package:  python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from kickedspin._kernels import load


def bench(impl, m0, n_steps, n_kicks, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.stroboscopic_batch(m0, 8.0, 3.0, 1.0, 1e-3, n_steps, n_kicks)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_single(impl, repeat=5):
    m = np.array([0.3, -0.5, math.sqrt(1 - 0.09 - 0.25)])
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.stroboscopic_run(m, 8.0, 3.0, 1.0, 1e-3, 1000, 4)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    impls = {}
    for name in ("cython", "python"):
        try:
            impls[name] = load(name)
        except Exception as exc:  # noqa: BLE001
            print(f"{name}: unavailable ({exc})")
    if len(impls) < 2:
        print("need both implementations for a comparison")

    rng = np.random.default_rng(0)
    m0 = rng.standard_normal((100, 3))
    m0 /= np.linalg.norm(m0, axis=1)[:, None]

    workloads = [
        ("100 traj x 50 kicks (batch sweep)", lambda impl: bench(impl, m0, 1000, 50)),
        ("1 traj x 4 kicks (refinement step)", bench_single),
    ]

    print(f"{'workload':38s}" + "".join(f"{n:>12s}" for n in impls))
    agree = None
    for label, fn in workloads:
        times = {name: fn(impl) for name, impl in impls.items()}
        row = f"{label:38s}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in impls)
        if len(times) == 2:
            ratio = times["python"] / times["cython"]
            row += f"   ({ratio:.1f}x)"
        print(row)

    if len(impls) == 2:
        a, _ = impls["cython"].stroboscopic_batch(m0, 8.0, 3.0, 1.0, 1e-3, 1000, 20)
        b, _ = impls["python"].stroboscopic_batch(m0, 8.0, 3.0, 1.0, 1e-3, 1000, 20)
        agree = np.abs(a - b).max()
        print(f"max |cython - python| over 20 kicks: {agree:.3e}")


if __name__ == "__main__":
    main()
