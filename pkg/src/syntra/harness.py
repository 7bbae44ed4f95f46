"""Dataset loading, task filtering, baselines, metrics, and the
experiment protocols (suite comparison, test-input scaling, unseen-set
generalization) at desk scale.

Task files are line-delimited JSON records:
``{"task_id", "description"?, "train": [{"input", "output"}...],
"test_inputs": [...], "test_outputs"?: [...]}``. A directory of one-task
``*.json`` files works too.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .core import OutputValue, Program, TaskSpec, Transcript, VersionSpace
from .engine import SyntraResult, resolve_version_space, run_direct_transduction, run_syntra
from .errors import EmptyProgramPool, SchemaError, SyntraError
from .executor import (
    Cache,
    DEFAULT_LIMITS,
    ExecLimits,
    GuestRunner,
    build_hypothesis_class,
    execution_matrix,
    filter_consistent,
    run_on_inputs,
)
from .oracle import Oracle

__all__ = [
    "APPROACHES",
    "TaskOutcome",
    "SuiteMetrics",
    "load_tasks",
    "filter_nontrivial",
    "baseline_random_program",
    "baseline_random_hypothesis",
    "baseline_majority_vote",
    "run_suite",
    "scaling_experiment",
    "run_unseen_experiment",
    "unseen_eval",
    "write_metrics",
    "render_comparison",
]

APPROACHES = (
    "syntra-maximin",
    "syntra-random",
    "random-program",
    "random-hypothesis",
    "majority-vote",
    "direct-transduction",
)

ProgramProvider = Callable[[TaskSpec], Sequence[Program]]
OracleFactory = Callable[[TaskSpec], Oracle]


@dataclass
class TaskOutcome:
    """Per-task result: predictions scored against ground truth."""

    task_id: str
    predicted_outputs: list[OutputValue]
    tau_calls: int
    solved: bool
    example_correct: int
    n_examples: int
    initial_class_size: int | None = None
    error: str | None = None

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "solved": self.solved,
            "example_correct": self.example_correct,
            "n_examples": self.n_examples,
            "tau_calls": self.tau_calls,
            "initial_class_size": self.initial_class_size,
            "error": self.error,
        }


@dataclass
class SuiteMetrics:
    """Aggregate over one approach: the three-column report plus the
    lower bound (tasks whose initial class has at least two hypotheses)."""

    approach: str
    n_tasks: int
    solved_tasks: int
    task_accuracy: float
    example_accuracy: float
    total_tau_calls: int
    lower_bound: int
    hard_failures: int
    outcomes: list[TaskOutcome] = field(default_factory=list)

    @classmethod
    def from_outcomes(cls, approach: str, outcomes: Sequence[TaskOutcome]) -> "SuiteMetrics":
        n = len(outcomes)
        solved = sum(1 for o in outcomes if o.solved)
        examples_total = sum(o.n_examples for o in outcomes)
        examples_correct = sum(o.example_correct for o in outcomes)
        return cls(
            approach=approach,
            n_tasks=n,
            solved_tasks=solved,
            task_accuracy=round(100.0 * solved / n, 4) if n else 0.0,
            example_accuracy=round(100.0 * examples_correct / examples_total, 4)
            if examples_total
            else 0.0,
            total_tau_calls=sum(o.tau_calls for o in outcomes),
            lower_bound=sum(
                1 for o in outcomes if o.initial_class_size is not None and o.initial_class_size >= 2
            ),
            hard_failures=sum(1 for o in outcomes if o.error is not None),
            outcomes=list(outcomes),
        )

    def to_record(self) -> dict:
        return {
            "approach": self.approach,
            "n_tasks": self.n_tasks,
            "solved_tasks": self.solved_tasks,
            "task_accuracy": self.task_accuracy,
            "example_accuracy": self.example_accuracy,
            "total_tau_calls": self.total_tau_calls,
            "lower_bound": self.lower_bound,
            "hard_failures": self.hard_failures,
            "outcomes": [o.to_record() for o in self.outcomes],
        }

    def report_text(self) -> str:
        return render_comparison([self])


def render_comparison(metrics: Sequence[SuiteMetrics]) -> str:
    """Human-readable table, one row per approach."""
    header = f"{'Approach':<22}{'Task Acc.':>11}{'Example Acc.':>14}{'Tau Calls':>11}"
    lines = [header, "-" * len(header)]
    for m in metrics:
        lines.append(
            f"{m.approach:<22}{m.task_accuracy:>11.1f}{m.example_accuracy:>14.1f}{m.total_tau_calls:>11d}"
        )
    first = metrics[0] if metrics else None
    if first is not None:
        lines.append("")
        lines.append(
            f"tasks: {first.n_tasks}   lower bound (|V0| >= 2): {first.lower_bound}   "
            f"hard failures: {sum(m.hard_failures for m in metrics)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# task loading


def _parse_task(obj: object, origin: str) -> TaskSpec:
    if not isinstance(obj, dict):
        raise SchemaError("task record must be an object", task_id=origin)
    task_id = obj.get("task_id")
    if not isinstance(task_id, str) or not task_id:
        raise SchemaError("missing or invalid field", task_id=origin, field_path="task_id")
    known = {"task_id", "description", "train", "test_inputs", "test_outputs"}
    for key in obj:
        if key not in known:
            raise SchemaError(f"unknown field {key!r}", task_id=task_id)
    train = obj.get("train")
    if not isinstance(train, list) or not train:
        raise SchemaError("must be a nonempty list", task_id=task_id, field_path="train")
    pairs = []
    for j, pair in enumerate(train):
        if not isinstance(pair, dict) or "input" not in pair or "output" not in pair:
            raise SchemaError(
                "each pair needs 'input' and 'output'", task_id=task_id, field_path=f"train[{j}]"
            )
        pairs.append((pair["input"], pair["output"]))
    test_inputs = obj.get("test_inputs")
    if not isinstance(test_inputs, list) or not test_inputs:
        raise SchemaError("must be a nonempty list", task_id=task_id, field_path="test_inputs")
    test_outputs = obj.get("test_outputs")
    if test_outputs is not None:
        if not isinstance(test_outputs, list) or len(test_outputs) != len(test_inputs):
            raise SchemaError(
                "must be a list matching test_inputs", task_id=task_id, field_path="test_outputs"
            )
    description = obj.get("description")
    if description is not None and not isinstance(description, str):
        raise SchemaError("must be a string", task_id=task_id, field_path="description")
    try:
        return TaskSpec(
            task_id=task_id,
            train_pairs=tuple(pairs),
            test_inputs=tuple(test_inputs),
            description=description,
            ground_truth_outputs=tuple(test_outputs) if test_outputs is not None else None,
        )
    except ValueError as exc:
        raise SchemaError(str(exc), task_id=task_id) from exc


def load_tasks(path: str | Path) -> list[TaskSpec]:
    """Load and validate tasks from a jsonl file or a directory of files."""
    p = Path(path)
    tasks: list[TaskSpec] = []
    if p.is_dir():
        sources = sorted(f for f in p.iterdir() if f.suffix in (".json", ".jsonl"))
        if not sources:
            raise SchemaError(f"no task files found in {p}")
    elif p.is_file():
        sources = [p]
    else:
        raise SchemaError(f"task path {p} does not exist")
    for source in sources:
        text = source.read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", task_id=f"{source.name}:{lineno}") from exc
            tasks.append(_parse_task(obj, origin=f"{source.name}:{lineno}"))
    seen: set[str] = set()
    for task in tasks:
        if task.task_id in seen:
            raise SchemaError("duplicate task id", task_id=task.task_id)
        seen.add(task.task_id)
    return tasks


# ---------------------------------------------------------------------------
# scoring and baselines


def _derive_seed(seed: int, task_id: str, salt: str = "") -> int:
    digest = hashlib.sha256(f"{seed}:{task_id}:{salt}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _score(predicted: Sequence[OutputValue], task: TaskSpec) -> tuple[bool, int]:
    gt = task.ground_truth_as_outputs()
    if gt is None:
        raise ValueError(f"task {task.task_id!r} has no ground truth to score against")
    correct = sum(1 for p, g in zip(predicted, gt) if p == g)
    solved = len(predicted) == len(gt) and correct == len(gt)
    return solved, correct


def _unsolved(task: TaskSpec, *, tau_calls: int = 0, size: int | None = None, error: str | None = None) -> TaskOutcome:
    return TaskOutcome(
        task_id=task.task_id,
        predicted_outputs=[],
        tau_calls=tau_calls,
        solved=False,
        example_correct=0,
        n_examples=task.num_test,
        initial_class_size=size,
        error=error,
    )


def _outcome(task: TaskSpec, predicted: Sequence[OutputValue], tau_calls: int, size: int | None) -> TaskOutcome:
    solved, correct = _score(predicted, task)
    return TaskOutcome(
        task_id=task.task_id,
        predicted_outputs=list(predicted),
        tau_calls=tau_calls,
        solved=solved,
        example_correct=correct,
        n_examples=task.num_test,
        initial_class_size=size,
    )


def baseline_random_program(
    survivors: Sequence[Program],
    task: TaskSpec,
    seed: int,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
    initial_class_size: int | None = None,
) -> TaskOutcome:
    """Uniform pick from the train-consistent pool, scored against GT."""
    if not survivors:
        return _unsolved(task, size=initial_class_size)
    rng = random.Random(seed)
    program = rng.choice(list(survivors))
    predicted = run_on_inputs(program, task.test_inputs, limits, runner=runner, cache=cache)
    return _outcome(task, predicted, 0, initial_class_size)


def baseline_random_hypothesis(
    space: VersionSpace | None,
    task: TaskSpec,
    seed: int,
) -> TaskOutcome:
    """Uniform pick from the deduplicated hypothesis class."""
    if space is None:
        return _unsolved(task)
    rng = random.Random(seed)
    hypothesis = rng.choice(list(space.hypotheses))
    return _outcome(task, hypothesis.outputs, 0, len(space))


def baseline_majority_vote(
    survivors: Sequence[Program],
    task: TaskSpec,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
    initial_class_size: int | None = None,
) -> TaskOutcome:
    """Per-input modal output over the surviving programs.

    Votes are counted per test input independently, so the winning tuple
    may match no single program. Ties break by canonical-text order.
    """
    if not survivors:
        return _unsolved(task, size=initial_class_size)
    matrix = execution_matrix(survivors, task.test_inputs, limits, runner=runner, cache=cache)
    predicted = []
    for j in range(task.num_test):
        counts: dict[tuple[str, str], int] = {}
        values: dict[tuple[str, str], OutputValue] = {}
        for _, outputs in matrix:
            ov = outputs[j]
            counts[ov.key] = counts.get(ov.key, 0) + 1
            values.setdefault(ov.key, ov)
        best_key = min(counts, key=lambda k: (-counts[k], k[1], k[0]))
        predicted.append(values[best_key])
    return _outcome(task, predicted, 0, initial_class_size)


def filter_nontrivial(
    tasks: Sequence[TaskSpec],
    programs_per_task: Mapping[str, Sequence[Program]] | ProgramProvider,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> list[TaskSpec]:
    """Keep tasks whose class holds the GT tuple and at least one other."""
    provider = _as_provider(programs_per_task)
    kept = []
    for task in tasks:
        gt = task.ground_truth_as_outputs()
        if gt is None:
            raise ValueError(f"task {task.task_id!r} has no ground truth")
        programs = list(provider(task))
        survivors = filter_consistent(programs, task, limits, runner=runner, cache=cache)
        if not survivors:
            continue
        space = build_hypothesis_class(survivors, task, limits, runner=runner, cache=cache)
        gt_key = tuple(ov.key for ov in gt)
        if len(space) >= 2 and any(h.key == gt_key for h in space.hypotheses):
            kept.append(task)
    return kept


def _as_provider(programs: Mapping[str, Sequence[Program]] | ProgramProvider) -> ProgramProvider:
    if callable(programs):
        return programs
    mapping = programs

    def provider(task: TaskSpec) -> Sequence[Program]:
        return mapping.get(task.task_id, ())

    return provider


# ---------------------------------------------------------------------------
# suite runner


def _evaluate_task(
    task: TaskSpec,
    approach: str,
    programs: Sequence[Program],
    oracle_factory: OracleFactory | None,
    limits: ExecLimits,
    seed: int,
    selector_rng_seed: int,
    runner: GuestRunner | None,
    cache: Cache | None,
    transcript_dir: Path | None,
) -> TaskOutcome:
    survivors: list[Program] = []
    space: VersionSpace | None = None
    if programs:
        survivors = filter_consistent(programs, task, limits, runner=runner, cache=cache)
        if survivors:
            space = build_hypothesis_class(survivors, task, limits, runner=runner, cache=cache)
    size = len(space) if space is not None else None

    if approach in ("syntra-maximin", "syntra-random"):
        if space is None:
            return _unsolved(task, size=None)
        oracle = oracle_factory(task) if oracle_factory else None
        if oracle is None:
            raise ValueError(f"approach {approach!r} needs an oracle")
        selector = "maximin" if approach == "syntra-maximin" else "random"
        final, tau_calls, transcript = resolve_version_space(
            task, space, oracle, selector, rng=random.Random(selector_rng_seed)
        )
        if transcript_dir is not None:
            transcript.write(transcript_dir / f"{task.task_id}.jsonl")
        return _outcome(task, final.outputs, tau_calls, size)

    if approach == "random-program":
        return baseline_random_program(
            survivors, task, seed, limits, runner=runner, cache=cache, initial_class_size=size
        )
    if approach == "random-hypothesis":
        outcome = baseline_random_hypothesis(space, task, seed)
        return outcome
    if approach == "majority-vote":
        return baseline_majority_vote(
            survivors, task, limits, runner=runner, cache=cache, initial_class_size=size
        )
    if approach == "direct-transduction":
        oracle = oracle_factory(task) if oracle_factory else None
        if oracle is None:
            raise ValueError("direct transduction needs an oracle")
        predicted = run_direct_transduction(task, oracle)
        return _outcome(task, predicted, task.num_test, size)
    raise ValueError(f"unknown approach {approach!r}")


def run_suite(
    tasks: Sequence[TaskSpec],
    approach: str,
    *,
    program_provider: Mapping[str, Sequence[Program]] | ProgramProvider,
    oracle_factory: OracleFactory | None = None,
    limits: ExecLimits = DEFAULT_LIMITS,
    seed: int = 0,
    parallelism: int = 1,
    transcript_dir: str | Path | None = None,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> SuiteMetrics:
    """Evaluate one approach over a task list and aggregate metrics.

    Per-task randomness is derived from ``seed`` and the task id, so runs
    are reproducible regardless of parallelism. Hard per-task errors are
    recorded on the outcome, not raised.
    """
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")
    provider = _as_provider(program_provider)
    tdir = Path(transcript_dir) if transcript_dir is not None else None
    if tdir is not None:
        tdir.mkdir(parents=True, exist_ok=True)

    def one(task: TaskSpec) -> TaskOutcome:
        try:
            return _evaluate_task(
                task,
                approach,
                list(provider(task)),
                oracle_factory,
                limits,
                _derive_seed(seed, task.task_id),
                _derive_seed(seed, task.task_id, "selector"),
                runner,
                cache,
                tdir,
            )
        except EmptyProgramPool:
            return _unsolved(task)
        except SyntraError as exc:
            return _unsolved(task, error=f"{type(exc).__name__}: {exc}")

    if parallelism <= 1:
        outcomes = [one(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(one, tasks))
    return SuiteMetrics.from_outcomes(approach, outcomes)


def scaling_experiment(
    tasks: Sequence[TaskSpec],
    n_values: Sequence[int],
    approaches: Sequence[str],
    **suite_kwargs,
) -> list[dict]:
    """Truncate visible test inputs to each ``n`` and rerun every approach.

    Truncation keeps the dataset's given order. Returns one row per
    (approach, n) with mean tau calls and the usual metrics.
    """
    if not n_values:
        raise ValueError("n_values must be nonempty")
    max_n = max(n_values)
    for task in tasks:
        if task.num_test < max_n:
            raise ValueError(
                f"task {task.task_id!r} has {task.num_test} test inputs, need {max_n}"
            )
    rows = []
    for approach in approaches:
        for n in n_values:
            truncated = [task.truncated(n) for task in tasks]
            metrics = run_suite(truncated, approach, **suite_kwargs)
            rows.append(
                {
                    "approach": approach,
                    "n_test_inputs": n,
                    "mean_tau_calls": round(metrics.total_tau_calls / max(metrics.n_tasks, 1), 4),
                    "task_accuracy": metrics.task_accuracy,
                    "example_accuracy": metrics.example_accuracy,
                    "total_tau_calls": metrics.total_tau_calls,
                    "lower_bound": metrics.lower_bound,
                }
            )
    return rows


def unseen_eval(
    result: SyntraResult,
    holdout_inputs: Sequence,
    holdout_outputs: Sequence,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> TaskOutcome:
    """Score the representative program on inputs the loop never saw.

    Execution errors simply fail to match the expected values.
    """
    if result.representative_program is None:
        raise ValueError("result carries no representative program")
    predicted = run_on_inputs(
        result.representative_program, list(holdout_inputs), limits, runner=runner, cache=cache
    )
    expected = [OutputValue.value(y) for y in holdout_outputs]
    correct = sum(1 for p, g in zip(predicted, expected) if p == g)
    return TaskOutcome(
        task_id=result.transcript.task_id,
        predicted_outputs=list(predicted),
        tau_calls=result.tau_calls,
        solved=correct == len(expected),
        example_correct=correct,
        n_examples=len(expected),
        initial_class_size=result.initial_class_size,
    )


def run_unseen_experiment(
    tasks: Sequence[TaskSpec],
    visible_values: Sequence[int],
    holdout_count: int,
    *,
    program_provider: Mapping[str, Sequence[Program]] | ProgramProvider,
    oracle_factory: OracleFactory,
    selector: str = "maximin",
    limits: ExecLimits = DEFAULT_LIMITS,
    seed: int = 0,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> list[dict]:
    """Hold out the last inputs of each task, vary the visible count, and
    measure how well the chosen program generalizes to the holdout."""
    if not visible_values:
        raise ValueError("visible_values must be nonempty")
    if holdout_count < 1:
        raise ValueError("holdout_count must be positive")
    provider = _as_provider(program_provider)
    needed = max(visible_values) + holdout_count
    for task in tasks:
        if task.num_test < needed:
            raise ValueError(f"task {task.task_id!r} has {task.num_test} test inputs, need {needed}")
    rows = []
    for visible in visible_values:
        outcomes = []
        for task in tasks:
            if task.ground_truth_outputs is None:
                raise ValueError(f"task {task.task_id!r} has no ground truth")
            holdout_inputs = task.test_inputs[-holdout_count:]
            holdout_outputs = task.ground_truth_outputs[-holdout_count:]
            visible_task = task.truncated(visible)
            try:
                result = run_syntra(
                    task=visible_task,
                    programs=list(provider(task)),
                    oracle=oracle_factory(visible_task),
                    selector=selector,
                    limits=limits,
                    rng=random.Random(_derive_seed(seed, task.task_id, "selector")),
                    runner=runner,
                    cache=cache,
                )
            except EmptyProgramPool:
                outcomes.append(_unsolved(task))
                continue
            outcomes.append(
                unseen_eval(result, holdout_inputs, holdout_outputs, limits, runner=runner, cache=cache)
            )
        solved = sum(1 for o in outcomes if o.solved)
        examples_total = sum(o.n_examples for o in outcomes)
        examples_correct = sum(o.example_correct for o in outcomes)
        rows.append(
            {
                "visible_inputs": visible,
                "holdout_count": holdout_count,
                "task_accuracy": round(100.0 * solved / max(len(outcomes), 1), 4),
                "example_accuracy": round(100.0 * examples_correct / max(examples_total, 1), 4),
                "total_tau_calls": sum(o.tau_calls for o in outcomes),
            }
        )
    return rows


def write_metrics(metrics: Sequence[SuiteMetrics], out_dir: str | Path) -> tuple[Path, Path]:
    """Write the machine-readable record and the human table; both are
    byte-deterministic for identical runs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = [m.to_record() for m in metrics]
    json_path = out / "metrics.json"
    json_path.write_text(
        json.dumps(record, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    text_path = out / "metrics.txt"
    text_path.write_text(render_comparison(metrics), encoding="utf-8")
    return json_path, text_path
