"""Benchmark the column-scoring kernel: numba JIT vs pure-numpy fallback.

Usage:
    python benchmarks/bench_selector.py [--repeats N]

The same fallback is what the package uses when SYNTRA_NO_NUMBA=1 is set.
"""

import argparse
import time

import numpy as np

from syntra.kernels import NUMBA_ENABLED, column_scores, column_scores_numpy


def make_case(rng, n_rows, n_cols, alphabet):
    codes = np.empty((n_rows, n_cols), dtype=np.int64)
    lens = np.empty((n_rows, n_cols), dtype=np.int64)
    for j in range(n_cols):
        raw = rng.integers(0, alphabet, size=n_rows)
        _, inverse = np.unique(raw, return_inverse=True)
        codes[:, j] = inverse
        lens[:, j] = 4 + codes[:, j]
    return codes, lens


def bench(fn, codes, lens, repeats):
    fn(codes, lens)  # warm-up (and JIT compile for the numba path)
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(codes, lens)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        (32, 50, 4),      # acceptance-suite scale
        (128, 200, 6),    # large candidate pool
        (512, 2000, 8),   # stress scale
    ]
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'rows':>6} {'cols':>6} {'numpy (ms)':>12} {'active (ms)':>12} {'speedup':>9}")
    for n_rows, n_cols, alphabet in cases:
        codes, lens = make_case(rng, n_rows, n_cols, alphabet)
        t_numpy = bench(column_scores_numpy, codes, lens, args.repeats)
        t_active = bench(column_scores, codes, lens, args.repeats)
        print(
            f"{n_rows:>6} {n_cols:>6} {t_numpy * 1e3:>12.3f} {t_active * 1e3:>12.3f} "
            f"{t_numpy / t_active:>9.1f}x"
        )


if __name__ == "__main__":
    main()
