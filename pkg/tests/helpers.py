"""Shared test utilities."""

import random

from syntra.fixtures import random_version_space


def draw_space(rng: random.Random, max_hyps: int, max_cols: int, alphabet: int = 4, **kwargs):
    """A feasible random version space: clamps |V| to alphabet ** columns."""
    cols = rng.randint(1, max_cols)
    hyps = rng.randint(2, max(2, min(max_hyps, alphabet**cols)))
    return random_version_space(rng, hyps, cols, alphabet, **kwargs)
