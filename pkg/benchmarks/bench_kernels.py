#!/usr/bin/env python3
"""Time the hot kernels: numba loops vs the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--sizes 4,16,64] [--repeat 200]

Prints per-kernel timings and the numba speedup at each body count. The
numba column needs the numba backend importable; results of the two paths
are cross-checked before timing.
"""

import argparse
import time

import numpy as np

from releq import _kernels


def make_inputs(n, k, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, k)) * 1.5 + np.arange(n)[:, None]
    masses = rng.uniform(0.5, 2.0, size=n)
    asq = np.zeros(k)
    asq[: 2 * (k // 2)] = np.repeat(rng.uniform(0.5, 2.0, size=k // 2) ** 2, 2)
    return _kernels.as_input(pts), masses, asq


def best_of(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="4,16,64")
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--k", type=int, default=2)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels.BACKEND != "numba":
        parser.error("numba backend unavailable; nothing to compare "
                     "(unset RELEQ_BACKEND and install numba)")

    a = -1.5
    kernels = [
        ("accel",
         lambda p, m, q: _kernels.accel_numpy(p, m, a),
         lambda p, m, q: _kernels.accel_numba(p, m, a)),
        ("residual",
         lambda p, m, q: _kernels.residual_stack_numpy(p, m, q, a),
         lambda p, m, q: _kernels.residual_stack_numba(p, m, q, a)),
        ("jacobian",
         lambda p, m, q: _kernels.jacobian_dense_numpy(p, m, q, a),
         lambda p, m, q: _kernels.jacobian_dense_numba(p, m, q, a)),
        ("min_dist",
         lambda p, m, q: _kernels.min_pair_distance_numpy(p),
         lambda p, m, q: _kernels.min_pair_distance_numba(p)),
    ]

    print(f"{'kernel':<10} {'n':>4} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in sizes:
        inputs = make_inputs(n, args.k)
        for name, np_fn, nb_fn in kernels:
            ref = np.asarray(np_fn(*inputs))
            got = np.asarray(nb_fn(*inputs))  # also triggers compilation
            if not np.allclose(ref, got, rtol=1e-10, atol=1e-12):
                raise SystemExit(f"{name}: backend results disagree at n={n}")
            t_np = best_of(np_fn, inputs, args.repeat)
            t_nb = best_of(nb_fn, inputs, args.repeat)
            print(f"{name:<10} {n:>4} {t_np * 1e6:>10.1f}us "
                  f"{t_nb * 1e6:>10.1f}us {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
