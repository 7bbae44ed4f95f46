"""Transduction oracles: given one test input and its candidate outputs,
pick one candidate as a pseudo-label.

Every implementation satisfies the closure property ``chosen in
candidates`` — an oracle never invents a label, which is what keeps the
version space nonempty through elimination. Five interchangeable kinds
ship here: ground truth, adversarial, noisy, replay, interactive, and a
remote LLM with zero-shot step-by-step prompting plus fuzzy matching.
"""

from __future__ import annotations

import random
import re
import sys
from dataclasses import dataclass
from typing import IO, Iterable

from .core import (
    CandidateSet,
    OutputValue,
    TaskSpec,
    Transcript,
    Value,
    VersionSpace,
    canonical_parse,
    canonical_serialize,
)
from .errors import InteractiveSessionClosed, ReplayMismatch
from .prompts import (
    apply_description,
    load_template,
    render_candidates,
    render_pairs,
)

__all__ = [
    "OracleQuery",
    "OraclePrediction",
    "Oracle",
    "GroundTruthOracle",
    "AdversarialOracle",
    "NoisyOracle",
    "ReplayOracle",
    "InteractiveOracle",
    "LlmOracle",
    "render_prompt",
    "render_direct_prompt",
    "extract_answer",
    "fuzzy_match",
    "levenshtein",
]


@dataclass(frozen=True)
class OracleQuery:
    """One query: the (ground-truth-free) task, a test input, candidates."""

    task: TaskSpec
    test_input: Value
    candidates: CandidateSet

    def __post_init__(self) -> None:
        if self.task.ground_truth_outputs is not None:
            raise ValueError("oracle queries must not carry ground truth; strip it first")


@dataclass(frozen=True)
class OraclePrediction:
    """The oracle's pick: always one of the query's candidates."""

    chosen: OutputValue
    raw_response: str
    match_score: float


def render_prompt(query: OracleQuery) -> str:
    """Instantiate the transduction template for one query.

    Candidates appear in the candidate set's presentation order, without
    supporter counts. Deterministic for a given query.
    """
    prompt = load_template("transduction").format(
        INPUT_OUTPUT_PAIRS=render_pairs(query.task.train_pairs),
        TEST_INPUT=_render_value(query.test_input),
        TEST_OUTPUT_CANDIDATES=render_candidates(query.candidates.values()),
    )
    return apply_description(prompt, query.task)


def render_direct_prompt(task: TaskSpec, test_input: Value) -> str:
    """Open-ended variant: no candidate list, used by direct transduction."""
    prompt = load_template("direct_transduction").format(
        INPUT_OUTPUT_PAIRS=render_pairs(task.train_pairs),
        TEST_INPUT=_render_value(test_input),
    )
    return apply_description(prompt, task)


def _render_value(value: Value) -> str:
    return canonical_serialize(value)


_FENCE_RE = re.compile(r"```(.*?)```", re.DOTALL)


def extract_answer(response: str) -> str:
    """The last code-fenced span if present, else the last non-empty line."""
    fences = _FENCE_RE.findall(response)
    if fences:
        return fences[-1].strip()
    for line in reversed(response.splitlines()):
        if line.strip():
            return line.strip()
    return response.strip()


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def _similarity(a: str, b: str) -> float:
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - levenshtein(a, b) / longest


def fuzzy_match(response: str, candidates: CandidateSet) -> tuple[OutputValue, float]:
    """Match a free-form response to the closest candidate.

    The answer span is compared against each candidate's canonical text and
    its bare string form by normalized edit similarity; ties keep the first
    candidate in presentation order. Always returns some candidate.
    """
    answer = extract_answer(response)
    best: OutputValue | None = None
    best_score = -1.0
    for ov, _count in candidates.candidates:
        score = max(_similarity(answer, ov.text), _similarity(answer, ov.unquoted()))
        if score > best_score:
            best, best_score = ov, score
    assert best is not None  # candidate sets are nonempty
    return best, best_score


class Oracle:
    """Interface: map one query to one of its candidates."""

    name = "oracle"

    def predict(self, query: OracleQuery) -> OraclePrediction:
        raise NotImplementedError

    def predict_open(self, task: TaskSpec, input_index: int, test_input: Value) -> OutputValue:
        """Open-ended prediction (no candidate restriction).

        Only implementations that can answer without a candidate list
        support this; it backs the direct-transduction baseline.
        """
        raise NotImplementedError(f"{self.name} oracle does not support open-ended prediction")


def _ground_truth_choice(
    gt: OutputValue, candidates: CandidateSet
) -> tuple[OutputValue, float]:
    found = candidates.find(gt)
    if found is not None:
        return found, 1.0
    # GT absent: the task is already unwinnable, but the run must complete
    # for metric accounting; fall back to the fuzzy-closest candidate.
    return fuzzy_match(gt.text, candidates)


class GroundTruthOracle(Oracle):
    """Answers with the ground-truth output (fuzzy-closest if absent)."""

    name = "ground-truth"

    def __init__(self, task: TaskSpec):
        gt = task.ground_truth_as_outputs()
        if gt is None:
            raise ValueError("ground-truth oracle needs a task with ground-truth outputs")
        self._gt = gt

    def predict(self, query: OracleQuery) -> OraclePrediction:
        gt = self._gt[query.candidates.input_index]
        chosen, score = _ground_truth_choice(gt, query.candidates)
        return OraclePrediction(chosen=chosen, raw_response=gt.text, match_score=score)

    def predict_open(self, task: TaskSpec, input_index: int, test_input: Value) -> OutputValue:
        return self._gt[input_index]


class AdversarialOracle(Oracle):
    """Worst case for the selector.

    Without a version space it can only play the greedy rule: keep as many
    hypotheses as possible (the most-supported candidate). Greedy play is
    not always the true worst case — a smaller branch can hide a deeper
    subgame — so when constructed with the initial version space it mirrors
    the eliminations and, within the exact comparator's size guard, answers
    with the candidate whose surviving subclass needs the most further
    queries.
    """

    name = "adversarial"

    def __init__(self, space: VersionSpace | None = None):
        self._space = space

    def _exact_choice(self, query: OracleQuery) -> OutputValue | None:
        from .selector import candidate_outputs, optimal_query_tree_depth

        space = self._space
        if space is None or len(space) > 10 or space.num_inputs > 6:
            return None
        index = query.candidates.input_index
        mirrored = candidate_outputs(index, space)
        if [(ov.key, n) for ov, n in mirrored.candidates] != [
            (ov.key, n) for ov, n in query.candidates.candidates
        ]:
            raise ValueError("adversarial oracle lost sync with the queried version space")
        best: OutputValue | None = None
        best_rank: tuple[int, int] | None = None
        for ov, count in query.candidates.candidates:
            survivors = space.eliminate(index, ov)
            rank = (optimal_query_tree_depth(survivors), count)
            if best_rank is None or rank > best_rank:
                best, best_rank = ov, rank
        assert best is not None
        self._space = space.eliminate(index, best)
        return best

    def predict(self, query: OracleQuery) -> OraclePrediction:
        chosen = self._exact_choice(query)
        if chosen is None:
            # Presentation order puts the most-supported candidate first.
            chosen = query.candidates.candidates[0][0]
            if self._space is not None:
                self._space = self._space.eliminate(query.candidates.input_index, chosen)
        return OraclePrediction(chosen=chosen, raw_response=chosen.text, match_score=1.0)


class NoisyOracle(Oracle):
    """Ground truth with probability 1 - epsilon, else a uniform wrong
    candidate; a deterministic function of (seed, query sequence)."""

    name = "noisy"

    def __init__(self, task: TaskSpec, epsilon: float, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        gt = task.ground_truth_as_outputs()
        if gt is None:
            raise ValueError("noisy oracle needs a task with ground-truth outputs")
        self._gt = gt
        self.epsilon = epsilon
        self._rng = random.Random(seed)

    def predict(self, query: OracleQuery) -> OraclePrediction:
        gt = self._gt[query.candidates.input_index]
        chosen, score = _ground_truth_choice(gt, query.candidates)
        flip = self._rng.random() < self.epsilon
        if flip:
            wrong = [ov for ov, _ in query.candidates.candidates if ov != chosen]
            if wrong:
                chosen = self._rng.choice(wrong)
                score = 0.0
        return OraclePrediction(chosen=chosen, raw_response=chosen.text, match_score=score)


class ReplayOracle(Oracle):
    """Replays a recorded transcript; any divergence is a hard error."""

    name = "replay"

    def __init__(self, transcript: Transcript):
        self._steps = list(transcript.steps)
        self._cursor = 0
        self._task_id = transcript.task_id

    def predict(self, query: OracleQuery) -> OraclePrediction:
        if self._cursor >= len(self._steps):
            raise ReplayMismatch(f"transcript for {self._task_id!r} exhausted")
        step = self._steps[self._cursor]
        if step.input_index != query.candidates.input_index:
            raise ReplayMismatch(
                f"replay expected query on input {step.input_index}, "
                f"got {query.candidates.input_index}"
            )
        recorded = [(ov.key, n) for ov, n in step.candidates.candidates]
        actual = [(ov.key, n) for ov, n in query.candidates.candidates]
        if recorded != actual:
            raise ReplayMismatch(f"candidate set diverged at step {self._cursor}")
        chosen = query.candidates.find(step.chosen)
        if chosen is None:
            raise ReplayMismatch("recorded choice is not among the candidates")
        self._cursor += 1
        return OraclePrediction(chosen=chosen, raw_response=step.raw_response, match_score=1.0)


class InteractiveOracle(Oracle):
    """Asks a human: renders the pairs, the input, and numbered candidates
    on the terminal and reads a selection."""

    name = "interactive"

    def __init__(self, in_stream: IO[str] | None = None, out_stream: IO[str] | None = None):
        self._in = in_stream
        self._out = out_stream

    def predict(self, query: OracleQuery) -> OraclePrediction:
        in_stream = self._in if self._in is not None else sys.stdin
        out = self._out if self._out is not None else sys.stdout
        task = query.task
        lines = []
        if task.description:
            lines.append(task.description)
            lines.append("")
        lines.append("Train pairs:")
        lines.append(render_pairs(task.train_pairs))
        lines.append("")
        lines.append(f"Test input: {_render_value(query.test_input)}")
        lines.append("Candidate outputs:")
        values = query.candidates.values()
        for k, ov in enumerate(values, 1):
            lines.append(f"  [{k}] {ov.text}")
        out.write("\n".join(lines) + "\n")
        while True:
            out.write(f"Select output [1-{len(values)}]: ")
            out.flush()
            raw = in_stream.readline()
            if raw == "":
                raise InteractiveSessionClosed("input stream closed during labeling")
            answer = raw.strip()
            if answer.isdigit() and 1 <= int(answer) <= len(values):
                chosen = values[int(answer) - 1]
                return OraclePrediction(chosen=chosen, raw_response=answer, match_score=1.0)
            out.write("Invalid selection.\n")


class LlmOracle(Oracle):
    """Remote chat-completion oracle with fuzzy candidate matching."""

    name = "llm"

    def __init__(self, client, temperature: float = 0.7):
        self._client = client
        self.temperature = temperature

    def predict(self, query: OracleQuery) -> OraclePrediction:
        prompt = render_prompt(query)
        raw = self._client.complete(prompt, temperature=self.temperature)
        chosen, score = fuzzy_match(raw, query.candidates)
        return OraclePrediction(chosen=chosen, raw_response=raw, match_score=score)

    def predict_open(self, task: TaskSpec, input_index: int, test_input: Value) -> OutputValue:
        prompt = render_direct_prompt(task, test_input)
        raw = self._client.complete(prompt, temperature=self.temperature)
        answer = extract_answer(raw)
        try:
            return OutputValue.value(canonical_parse(answer))
        except ValueError:
            return OutputValue.value(answer)
