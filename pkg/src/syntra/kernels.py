"""Column-scoring kernels behind maximin input selection.

Selection reduces to scoring every test-input column of an integer-coded
output matrix: worst-case eliminations (rows minus the largest candidate
multiplicity) and the total text length of the distinct candidates (the
tie-break quantity). This is the hot inner loop of the whole framework —
it runs once per oracle call on every surviving hypothesis — so it is
JIT-compiled with numba when available. Set ``SYNTRA_NO_NUMBA=1`` to force
the pure-numpy fallback; ``benchmarks/bench_selector.py`` compares the two.

Codes must be column-local dense integers in ``[0, n_rows)``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["column_scores", "column_scores_numpy", "NUMBA_ENABLED"]


def column_scores_numpy(codes: np.ndarray, lens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pure-numpy reference path. Returns (min_eliminations, tie_lengths)."""
    n_rows, n_cols = codes.shape
    min_elim = np.empty(n_cols, dtype=np.int64)
    tie_len = np.empty(n_cols, dtype=np.int64)
    for j in range(n_cols):
        _, first, counts = np.unique(codes[:, j], return_index=True, return_counts=True)
        min_elim[j] = n_rows - counts.max()
        tie_len[j] = int(lens[first, j].sum())
    return min_elim, tie_len


def _column_scores_loops(codes: np.ndarray, lens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_rows, n_cols = codes.shape
    min_elim = np.empty(n_cols, dtype=np.int64)
    tie_len = np.empty(n_cols, dtype=np.int64)
    counts = np.zeros(n_rows, dtype=np.int64)
    for j in range(n_cols):
        max_count = 0
        total_len = 0
        for r in range(n_rows):
            c = codes[r, j]
            counts[c] += 1
            if counts[c] == 1:
                total_len += lens[r, j]
            if counts[c] > max_count:
                max_count = counts[c]
        for r in range(n_rows):
            counts[codes[r, j]] = 0
        min_elim[j] = n_rows - max_count
        tie_len[j] = total_len
    return min_elim, tie_len


NUMBA_ENABLED = os.environ.get("SYNTRA_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    column_scores = njit(cache=True)(_column_scores_loops)
else:
    column_scores = column_scores_numpy
