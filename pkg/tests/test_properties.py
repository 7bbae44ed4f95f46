"""Property-based invariants over values, outputs, and the version space."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import draw_space
from syntra.core import CandidateSet, OutputValue, TaskSpec, canonical_parse, canonical_serialize
from syntra.engine import resolve_version_space
from syntra.oracle import NoisyOracle, fuzzy_match
from syntra.selector import candidate_outputs, exhaustive_maximin, maximin_select

json_values = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(min_value=-(2**53), max_value=2**53)
    | st.floats(allow_nan=False, allow_infinity=False)
    | st.text(max_size=20),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=12,
)


@pytest.mark.property_based
@given(json_values)
@settings(max_examples=300)
def test_canonical_round_trip(value):
    assert canonical_parse(canonical_serialize(value)) == value


@pytest.mark.property_based
@given(json_values)
@settings(max_examples=200)
def test_serialization_is_deterministic(value):
    assert canonical_serialize(value) == canonical_serialize(value)


@pytest.mark.property_based
@given(json_values, json_values)
@settings(max_examples=200)
def test_output_equality_iff_canonical_equality(a, b):
    same_text = canonical_serialize(a) == canonical_serialize(b)
    assert (OutputValue.value(a) == OutputValue.value(b)) == same_text
    if same_text:
        assert hash(OutputValue.value(a)) == hash(OutputValue.value(b))


@pytest.mark.property_based
@given(st.text(max_size=40), st.lists(st.text(max_size=20), min_size=1, max_size=6))
@settings(max_examples=200)
def test_fuzzy_match_always_in_candidates(response, texts):
    candidates = CandidateSet(
        0, tuple((OutputValue.value(t), 1) for t in dict.fromkeys(texts))
    )
    chosen, score = fuzzy_match(response, candidates)
    assert any(chosen == ov for ov, _ in candidates.candidates)
    assert 0.0 <= score <= 1.0


@pytest.mark.property_based
@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=60, deadline=None)
def test_elimination_laws_on_random_classes(seed):
    rng = random.Random(seed)
    space = draw_space(rng, 16, 6, with_mixed_kinds=True)
    selection = maximin_select(space)
    assert selection.input_index in exhaustive_maximin(space)
    candidates = candidate_outputs(selection.input_index, space)
    assert candidates.total_supporters() == len(space)
    for chosen, count in candidates.candidates:
        survivors = space.eliminate(selection.input_index, chosen)
        assert len(survivors) == count
        assert 1 <= len(survivors) < len(space)
        again = survivors.eliminate(selection.input_index, chosen)
        assert [h.key for h in again.hypotheses] == [h.key for h in survivors.hypotheses]


@pytest.mark.property_based
@given(st.integers(min_value=0, max_value=2**32), st.floats(min_value=0.0, max_value=0.5))
@settings(max_examples=40, deadline=None)
def test_loop_contracts_under_noise(seed, epsilon):
    rng = random.Random(seed)
    space = draw_space(rng, 12, 5)
    gt_row = [ov.payload for ov in rng.choice(space.hypotheses).outputs]
    task = TaskSpec(
        "prop",
        (("x", "y"),),
        tuple(f"t{i}" for i in range(space.num_inputs)),
        ground_truth_outputs=tuple(gt_row),
    )
    oracle = NoisyOracle(task, epsilon=epsilon, seed=seed)
    final, tau, transcript = resolve_version_space(task, space, oracle)
    assert tau <= len(space) - 1
    assert (tau == 0) == (len(space) == 1)
    for step in transcript.steps:
        assert 1 <= step.size_after < step.size_before
    assert final.key in {h.key for h in space.hypotheses}
