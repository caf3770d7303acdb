#!/usr/bin/env python3
"""Benchmark the compiled alignment kernel against the numpy fallback.

Times the forward Viterbi fill on realistic line-recognition shapes
(hundreds of timesteps, transcripts of tens of characters) and checks
that both kernels return bit-identical results while at it.

Usage: python benchmarks/bench_viterbi.py [--repeats 20]
"""

import argparse
import time

import numpy as np

from scribeforge._viterbi_py import viterbi_fill as fill_py

try:
    from scribeforge._viterbi_c import viterbi_fill as fill_c
except ImportError:
    fill_c = None


def make_instance(rng, n, u):
    s = 2 * u + 1
    probs = rng.dirichlet(np.ones(s) * 0.3, size=n)
    val = np.log2(np.maximum(probs, 1e-300))
    floored = np.zeros((n, s), dtype=np.uint8)
    skip = (rng.random(s) < 0.7).astype(np.uint8)
    skip[:2] = 0
    return np.ascontiguousarray(val), floored, skip


def bench(fill, val, floored, skip, repeats):
    n, s = val.shape
    best = float("inf")
    result = None
    for _ in range(repeats):
        bp = np.empty((n, s), dtype=np.int8)
        t0 = time.perf_counter()
        result = fill(val, floored, skip, bp)
        best = min(best, time.perf_counter() - t0)
    return best, result, bp


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    shapes = [(128, 16), (256, 32), (512, 64), (1024, 96)]
    print(f"{'timesteps':>10} {'chars':>6} {'numpy':>12} {'cython':>12} {'speedup':>8}")
    for n, u in shapes:
        val, floored, skip = make_instance(rng, n, u)
        t_py, res_py, bp_py = bench(fill_py, val, floored, skip, args.repeats)
        if fill_c is None:
            print(f"{n:>10} {u:>6} {t_py * 1e3:>10.3f}ms {'(not built)':>12}")
            continue
        t_c, res_c, bp_c = bench(fill_c, val, floored, skip, args.repeats)
        assert np.array_equal(res_py[0], res_c[0])
        assert np.array_equal(res_py[1], res_c[1])
        assert np.array_equal(bp_py, bp_c)
        print(f"{n:>10} {u:>6} {t_py * 1e3:>10.3f}ms {t_c * 1e3:>10.3f}ms "
              f"{t_py / t_c:>7.1f}x")
    if fill_c is not None:
        print("kernels agree bit for bit on all shapes")


if __name__ == "__main__":
    main()
