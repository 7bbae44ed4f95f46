"""The main loop: select an input, query the oracle, eliminate, repeat
until a single hypothesis survives.

Each task's loop is strictly sequential (queries are adaptive); distinct
tasks may run concurrently since nothing here holds shared mutable state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Hypothesis, OutputValue, Program, TaskSpec, Transcript, TranscriptStep, VersionSpace
from .errors import EmptyProgramPool, SyntraError
from .executor import Cache, DEFAULT_LIMITS, ExecLimits, GuestRunner, build_hypothesis_class, filter_consistent
from .oracle import Oracle, OracleQuery
from .selector import candidate_outputs, maximin_select, random_select

__all__ = ["SyntraResult", "resolve_version_space", "run_syntra", "run_direct_transduction"]

SELECTORS = ("maximin", "random")


@dataclass
class SyntraResult:
    """Outcome of one task run: the surviving hypothesis and its cost."""

    final_hypothesis: Hypothesis
    representative_program: Program | None
    tau_calls: int
    transcript: Transcript
    initial_class_size: int


def resolve_version_space(
    task: TaskSpec,
    space: VersionSpace,
    oracle: Oracle,
    selector: str = "maximin",
    *,
    rng: random.Random | int | None = None,
    transcript: Transcript | None = None,
) -> tuple[Hypothesis, int, Transcript]:
    """Run the elimination loop on an existing version space.

    Returns the surviving hypothesis, the number of oracle calls, and the
    transcript. Oracle hard errors propagate with the partial transcript
    attached as ``partial_transcript``.
    """
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    stripped = task.without_ground_truth()
    if transcript is None:
        transcript = Transcript(task_id=task.task_id, initial_class_size=len(space))
    elif transcript.initial_class_size is None:
        transcript.initial_class_size = len(space)
    tau_calls = 0
    while len(space) > 1:
        if selector == "maximin":
            selection = maximin_select(space)
        else:
            selection = random_select(space, rng)
        index = selection.input_index
        candidates = candidate_outputs(index, space)
        query = OracleQuery(
            task=stripped,
            test_input=stripped.test_inputs[index],
            candidates=candidates,
        )
        try:
            prediction = oracle.predict(query)
        except SyntraError as exc:
            exc.partial_transcript = transcript  # type: ignore[attr-defined]
            raise
        size_before = len(space)
        space = space.eliminate(index, prediction.chosen)
        tau_calls += 1
        transcript.append(
            TranscriptStep(
                iteration=space.iteration - 1,
                input_index=index,
                candidates=candidates,
                raw_response=prediction.raw_response,
                chosen=prediction.chosen,
                size_before=size_before,
                size_after=len(space),
            )
        )
    return space.hypotheses[0], tau_calls, transcript


def run_syntra(
    task: TaskSpec,
    programs: list[Program],
    oracle: Oracle,
    selector: str = "maximin",
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    rng: random.Random | int | None = None,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> SyntraResult:
    """Filter, build the hypothesis class, and eliminate down to one.

    The representative program is the supporter of the final hypothesis
    with the lexicographically smallest id (downstream unseen-set
    evaluation needs a concrete program, not just an output tuple).
    """
    if not programs:
        raise EmptyProgramPool(f"no candidate programs for task {task.task_id!r}")
    survivors = filter_consistent(programs, task, limits, runner=runner, cache=cache)
    space = build_hypothesis_class(survivors, task, limits, runner=runner, cache=cache)
    initial_size = len(space)
    final, tau_calls, transcript = resolve_version_space(
        task, space, oracle, selector, rng=rng
    )
    representative_id = min(final.program_ids)
    representative = next(p for p in survivors if p.program_id == representative_id)
    return SyntraResult(
        final_hypothesis=final,
        representative_program=representative,
        tau_calls=tau_calls,
        transcript=transcript,
        initial_class_size=initial_size,
    )


def run_direct_transduction(task: TaskSpec, oracle: Oracle) -> list[OutputValue]:
    """Baseline: predict every test output directly, one call per input."""
    stripped = task.without_ground_truth()
    return [
        oracle.predict_open(stripped, i, x) for i, x in enumerate(stripped.test_inputs)
    ]
