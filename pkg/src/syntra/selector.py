"""Input query selection: greedy maximin, a random baseline, and the
exhaustive comparators used as test oracles.

The maximin rule picks the test input whose worst-case oracle answer
eliminates the most hypotheses; ties go to the candidate set with the
smallest total canonical-text length, then to the smallest index, so every
run is deterministic and replayable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import CandidateSet, OutputValue, VersionSpace
from .errors import NoInformativeInput, SizeGuardError
from .kernels import column_scores

__all__ = [
    "SelectorResult",
    "candidate_outputs",
    "maximin_select",
    "random_select",
    "exhaustive_maximin",
    "optimal_query_tree_depth",
]


@dataclass(frozen=True)
class SelectorResult:
    """Chosen input index, its worst-case elimination count, and how many
    indices tied at that count before tie-breaking."""

    input_index: int
    maximin_value: int
    tie_set_size: int


def candidate_outputs(i: int, space: VersionSpace) -> CandidateSet:
    """Deduplicated outputs in column ``i`` with hypothesis supporter counts.

    Order: supporter count descending, then canonical text ascending — the
    fixed presentation order for oracles.
    """
    if not 0 <= i < space.num_inputs:
        raise IndexError(f"input index {i} out of range")
    counts: dict[tuple[str, str], int] = {}
    first: dict[tuple[str, str], OutputValue] = {}
    for h in space.hypotheses:
        ov = h.outputs[i]
        k = ov.key
        if k in counts:
            counts[k] += 1
        else:
            counts[k] = 1
            first[k] = ov
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][1], kv[0][0]))
    return CandidateSet(input_index=i, candidates=tuple((first[k], n) for k, n in ordered))


def _encode(space: VersionSpace) -> tuple[np.ndarray, np.ndarray]:
    """Integer-code every column (column-local dense codes) plus text lengths."""
    n_rows = len(space)
    n_cols = space.num_inputs
    codes = np.empty((n_rows, n_cols), dtype=np.int64)
    lens = np.empty((n_rows, n_cols), dtype=np.int64)
    for j in range(n_cols):
        mapping: dict[tuple[str, str], int] = {}
        for r, h in enumerate(space.hypotheses):
            ov = h.outputs[j]
            code = mapping.setdefault(ov.key, len(mapping))
            codes[r, j] = code
            lens[r, j] = len(ov.text)
    return codes, lens


def maximin_select(space: VersionSpace) -> SelectorResult:
    """Greedy maximin choice over unresolved columns.

    Maximizes the worst-case number of eliminated hypotheses; breaks ties
    by the smallest total candidate-text length, then by the smallest index.
    """
    if len(space) < 2:
        raise ValueError("selection needs at least two hypotheses")
    codes, lens = _encode(space)
    min_elim, tie_len = column_scores(codes, lens)
    best = -1
    for j in range(space.num_inputs):
        if j in space.resolved:
            continue
        if min_elim[j] > best:
            best = int(min_elim[j])
    if best < 1:
        raise NoInformativeInput(
            "every unresolved column is unanimous despite multiple hypotheses"
        )
    tied = [j for j in range(space.num_inputs) if j not in space.resolved and min_elim[j] == best]
    chosen = min(tied, key=lambda j: (tie_len[j], j))
    return SelectorResult(input_index=chosen, maximin_value=best, tie_set_size=len(tied))


def _worst_case_eliminations(space: VersionSpace, i: int) -> int:
    counts: dict[tuple[str, str], int] = {}
    for h in space.hypotheses:
        k = h.outputs[i].key
        counts[k] = counts.get(k, 0) + 1
    return len(space) - max(counts.values())


def random_select(space: VersionSpace, rng: random.Random | int) -> SelectorResult:
    """Uniform choice among unresolved columns with at least two candidates."""
    if len(space) < 2:
        raise ValueError("selection needs at least two hypotheses")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    eligible = [
        j
        for j in range(space.num_inputs)
        if j not in space.resolved and len({h.outputs[j].key for h in space.hypotheses}) >= 2
    ]
    if not eligible:
        raise NoInformativeInput(
            "every unresolved column is unanimous despite multiple hypotheses"
        )
    chosen = rng.choice(eligible)
    return SelectorResult(
        input_index=chosen,
        maximin_value=_worst_case_eliminations(space, chosen),
        tie_set_size=len(eligible),
    )


def exhaustive_maximin(space: VersionSpace) -> set[int]:
    """Test oracle: the exact maximin argmax set by full enumeration.

    Recomputes the criterion column by column and candidate by candidate
    with no pruning, no encoding, and no shared code with the fast path.
    """
    if len(space) > 64 or space.num_inputs > 16:
        raise SizeGuardError("exhaustive_maximin is limited to |V| <= 64 and N <= 16")
    scores: dict[int, int] = {}
    for i in range(space.num_inputs):
        column = [h.outputs[i] for h in space.hypotheses]
        worst = None
        for y in column:
            eliminated = sum(1 for h in space.hypotheses if h.outputs[i] != y)
            if worst is None or eliminated < worst:
                worst = eliminated
        scores[i] = worst if worst is not None else 0
    best = max(scores.values())
    return {i for i, s in scores.items() if s == best}


def optimal_query_tree_depth(space: VersionSpace) -> int:
    """Minimal worst-case query count of ANY adaptive policy.

    Exhaustive game-tree search: the policy picks a column, the adversary
    answers with any candidate consistent with at least one surviving
    hypothesis. Comparison oracle only; guarded to test scale.
    """
    if len(space) > 10 or space.num_inputs > 6:
        raise SizeGuardError("optimal_query_tree_depth is limited to |V| <= 10 and N <= 6")
    hyps = space.hypotheses
    n_cols = space.num_inputs

    @lru_cache(maxsize=None)
    def depth(state: frozenset) -> int:
        if len(state) <= 1:
            return 0
        best = len(state)  # never needs more than |state| - 1 <= this bound
        for i in range(n_cols):
            values = {hyps[r].outputs[i].key for r in state}
            if len(values) < 2:
                continue
            worst = 0
            for key in values:
                nxt = frozenset(r for r in state if hyps[r].outputs[i].key == key)
                worst = max(worst, depth(nxt))
                if 1 + worst >= best:
                    break
            best = min(best, 1 + worst)
        return best

    return depth(frozenset(range(len(hyps))))
