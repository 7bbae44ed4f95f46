"""Acceptance gate: every criterion at its stated tolerance and budget.

Run with ``pytest tests/test_acceptance.py -s`` to see one pass/fail line
per criterion.
"""

import json
import random
import time
from pathlib import Path

import pytest

from syntra.core import Hypothesis, OutputValue, Program, TaskSpec, Transcript, TranscriptStep, VersionSpace
from syntra.dsl import print_dsl
from syntra.engine import resolve_version_space, run_syntra
from syntra.executor import build_hypothesis_class, filter_consistent
from syntra.fixtures import (
    generate_dsl_task,
    mutate_dsl_ast,
    random_dsl_ast,
    random_version_space,
    skewed_version_space,
    truncate_version_space,
)
from syntra.harness import run_suite, write_metrics
from syntra.oracle import AdversarialOracle, GroundTruthOracle, NoisyOracle, ReplayOracle
from syntra.selector import (
    candidate_outputs,
    exhaustive_maximin,
    maximin_select,
    optimal_query_tree_depth,
)

DATA = Path(__file__).parent / "data"

pytestmark = pytest.mark.acceptance


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def _synthetic_task(space: VersionSpace, gt_row=None) -> TaskSpec:
    return TaskSpec(
        "synthetic",
        (("train-in", "train-out"),),
        tuple(f"t{i}" for i in range(space.num_inputs)),
        ground_truth_outputs=tuple(gt_row) if gt_row is not None else None,
    )


def _draw_class(rng: random.Random, max_hyps: int, max_cols: int) -> VersionSpace:
    cols = rng.randint(1, max_cols)
    alphabet = rng.randint(2, 4)
    hyps = rng.randint(2, min(max_hyps, alphabet**cols))
    return random_version_space(rng, hyps, cols, alphabet)


def test_maximin_exactness():
    """1,000 seeded classes: the fast path always lands in the argmax set."""
    started = time.perf_counter()
    hand = VersionSpace(
        [
            Hypothesis([OutputValue.value(v) for v in row], (f"p{i}",))
            for i, row in enumerate([("a", "x", "p"), ("a", "y", "p"), ("b", "y", "q"), ("b", "y", "p")])
        ]
    )
    hand_selection = maximin_select(hand)
    agree = 0
    rng = random.Random(20_240)
    for _ in range(1000):
        space = _draw_class(rng, 32, 8)
        if maximin_select(space).input_index in exhaustive_maximin(space):
            agree += 1
    elapsed = time.perf_counter() - started
    ok = (
        agree == 1000
        and hand_selection.input_index == 0
        and hand_selection.maximin_value == 2
        and elapsed < 10.0
    )
    _report(
        "maximin exactness",
        ok,
        f"agreement {agree}/1000, hand-traced index {hand_selection.input_index}, {elapsed:.1f}s",
    )


def test_realizable_correctness():
    """500 generated tasks with the GT tuple in the class: always recovered."""
    started = time.perf_counter()
    rng = random.Random(7)
    recovered = 0
    bounds_ok = True
    for i in range(500):
        task, programs = generate_dsl_task(rng, f"acc-{i:04d}")
        result = run_syntra(task, programs, GroundTruthOracle(task))
        gt_key = tuple(ov.key for ov in task.ground_truth_as_outputs())
        if result.final_hypothesis.key == gt_key:
            recovered += 1
        if not 0 <= result.tau_calls <= result.initial_class_size - 1:
            bounds_ok = False
    elapsed = time.perf_counter() - started
    ok = recovered == 500 and bounds_ok and elapsed < 60.0
    _report("realizable correctness", ok, f"recovered {recovered}/500, {elapsed:.1f}s")


def test_query_count_bounds():
    """tau within [0, |V0|-1]; worst-case adversary never beats the exact
    game value on comparator-scale instances."""
    rng = random.Random(99)
    instances = 0
    violations = 0
    while instances < 200:
        cols = rng.randint(1, 6)
        alphabet = rng.randint(2, 4)
        hyps = rng.randint(2, min(10, alphabet**cols))
        space = random_version_space(rng, hyps, cols, alphabet)
        task = _synthetic_task(space)
        _, tau, _ = resolve_version_space(task, space, AdversarialOracle(space))
        depth = optimal_query_tree_depth(space)
        if not (0 <= tau <= len(space) - 1 and tau >= depth):
            violations += 1
        instances += 1
    _report("query-count bounds", violations == 0, f"{instances} adversarial instances, {violations} violations")


def _efficiency_runs(classes, seeds_per_class, epsilon):
    totals = {"maximin": 0, "random": 0}
    runs = {"maximin": 0, "random": 0}
    for ci, space in enumerate(classes):
        gt_row = [ov.payload for ov in random.Random(10_000 + ci).choice(space.hypotheses).outputs]
        task = _synthetic_task(space, gt_row)
        for seed in range(seeds_per_class):
            for sel in ("maximin", "random"):
                oracle = NoisyOracle(task, epsilon=epsilon, seed=(ci * 1009 + seed) & 0x7FFFFFFF)
                _, tau, _ = resolve_version_space(
                    task,
                    space,
                    oracle,
                    selector=sel,
                    rng=random.Random((ci * 9176 + seed * 31 + 7) & 0x7FFFFFFF),
                )
                assert 0 <= tau <= len(space) - 1
                totals[sel] += tau
                runs[sel] += 1
    return {k: totals[k] / runs[k] for k in totals}


def test_maximin_vs_random_efficiency():
    """Directional analog of the selector comparison: maximin needs no more
    calls than random, and at most 0.8x the excess over the lower bound."""
    started = time.perf_counter()
    rng = random.Random(41)
    classes = [skewed_version_space(rng, rng.randint(8, 32), 50) for _ in range(500)]
    means = _efficiency_runs(classes, seeds_per_class=10, epsilon=0.1)
    elapsed = time.perf_counter() - started
    excess_ratio = (means["maximin"] - 1.0) / (means["random"] - 1.0)
    ok = (
        means["maximin"] <= means["random"]
        and (means["maximin"] - 1.0) <= 0.8 * (means["random"] - 1.0)
        and elapsed < 300.0
    )
    _report(
        "maximin vs random efficiency",
        ok,
        f"mean tau maximin {means['maximin']:.3f} vs random {means['random']:.3f}, "
        f"excess ratio {excess_ratio:.3f} (<= 0.8), {elapsed:.1f}s",
    )


def test_sublinear_scaling():
    """Fixed |V0| = 16: growing the visible test set 8x costs under 4x."""
    started = time.perf_counter()
    rng = random.Random(53)
    classes = [
        skewed_version_space(rng, 16, 40, distinct_prefix=5) for _ in range(200)
    ]
    mean_tau = {}
    for n in (5, 10, 20, 40):
        total = 0
        runs = 0
        for ci, space in enumerate(classes):
            cut = truncate_version_space(space, n)
            assert len(cut) == 16
            gt_row = [ov.payload for ov in random.Random(20_000 + ci).choice(cut.hypotheses).outputs]
            task = _synthetic_task(cut, gt_row)
            for seed in range(3):
                oracle = NoisyOracle(task, epsilon=0.1, seed=(ci * 31 + seed) & 0x7FFFFFFF)
                _, tau, _ = resolve_version_space(task, cut, oracle)
                assert 0 <= tau <= len(cut) - 1
                total += tau
                runs += 1
        mean_tau[n] = total / runs
    elapsed = time.perf_counter() - started
    ok = mean_tau[40] < 4.0 * mean_tau[5] and elapsed < 300.0
    _report(
        "sub-linear scaling",
        ok,
        "mean tau by N: " + ", ".join(f"{n}: {mean_tau[n]:.2f}" for n in (5, 10, 20, 40)) + f"; "
        f"ratio {mean_tau[40] / mean_tau[5]:.2f} (< 4), {elapsed:.1f}s",
    )


def _random_dsl_pool_task(rng: random.Random, index: int):
    base = random_dsl_ast(rng)
    from syntra.dsl import DslProgram, eval_dsl
    from syntra.fixtures import _random_input  # shared input shape

    for _ in range(50):
        inputs = [_random_input(rng) for _ in range(4)]
        outputs = [eval_dsl(DslProgram(base), x) for x in inputs]
        if all(ov.kind == "value" for ov in outputs):
            break
    else:
        return None
    task = TaskSpec(
        f"law-{index}",
        ((inputs[0], outputs[0].payload),),
        tuple(inputs[1:]),
    )
    asts = [base]
    for _ in range(rng.randint(1, 6)):
        asts.append(mutate_dsl_ast(rng, rng.choice(asts)))
    pool = [Program(f"law-{index}-p{i}", print_dsl(ast)) for i, ast in enumerate(asts)]
    return task, pool


def test_version_space_laws():
    """10,000 randomized law checks with zero violations."""
    rng = random.Random(2_118)
    checked = 0
    violations = 0

    # monotone contraction + non-emptiness (4,000 cases)
    for _ in range(4000):
        cols = rng.randint(1, 6)
        alphabet = 4
        hyps = rng.randint(2, min(16, alphabet**cols))
        space = random_version_space(rng, hyps, cols, with_mixed_kinds=True)
        selection = maximin_select(space)
        cands = candidate_outputs(selection.input_index, space)
        chosen = rng.choice(cands.values())
        survivors = space.eliminate(selection.input_index, chosen)
        if not 1 <= len(survivors) < len(space):
            violations += 1
        checked += 1

    # elimination idempotence (3,000 cases)
    for _ in range(3000):
        cols = rng.randint(1, 5)
        hyps = rng.randint(2, min(12, 4**cols))
        space = random_version_space(rng, hyps, cols, with_mixed_kinds=True)
        index = rng.randrange(space.num_inputs)
        chosen = rng.choice(candidate_outputs(index, space).values())
        once = space.eliminate(index, chosen)
        twice = once.eliminate(index, chosen)
        if [h.key for h in twice.hypotheses] != [h.key for h in once.hypotheses]:
            violations += 1
        checked += 1

    # dedup size bound |V0| <= |P'| <= |P| (3,000 cases)
    built = 0
    while built < 3000:
        drawn = _random_dsl_pool_task(rng, built)
        if drawn is None:
            continue
        task, pool = drawn
        survivors = filter_consistent(pool, task)
        if not survivors:
            continue
        space = build_hypothesis_class(survivors, task)
        supporter_ids = [pid for h in space.hypotheses for pid in h.program_ids]
        if not (
            len(space) <= len(survivors) <= len(pool)
            and sorted(supporter_ids) == sorted(p.program_id for p in survivors)
        ):
            violations += 1
        built += 1
        checked += 1

    _report("version-space laws", violations == 0, f"{checked} cases, {violations} violations")


def test_replay_determinism(tmp_path):
    """A recorded 50-task noisy run replays to byte-identical metrics."""
    rng = random.Random(404)
    tasks, pools = [], {}
    for i in range(50):
        task, programs = generate_dsl_task(rng, f"rec-{i:03d}")
        tasks.append(task)
        pools[task.task_id] = programs

    recorded_dir = tmp_path / "recorded"
    metrics = run_suite(
        tasks,
        "syntra-maximin",
        program_provider=pools,
        oracle_factory=lambda task: NoisyOracle(task, epsilon=0.1, seed=17),
        seed=5,
        transcript_dir=recorded_dir / "transcripts",
    )
    write_metrics([metrics], recorded_dir)

    replay_dir = tmp_path / "replayed"
    replayed = run_suite(
        tasks,
        "syntra-maximin",
        program_provider=pools,
        oracle_factory=lambda task: ReplayOracle(
            Transcript.read(recorded_dir / "transcripts" / f"{task.task_id}.jsonl")
        ),
        seed=5,
        transcript_dir=replay_dir / "transcripts",
    )
    write_metrics([replayed], replay_dir)
    identical = all(
        (recorded_dir / name).read_bytes() == (replay_dir / name).read_bytes()
        for name in ("metrics.json", "metrics.txt")
    )
    _report("replay determinism", identical, "metrics.json and metrics.txt byte-identical")


def test_recorded_trace_class_of_six():
    """The stored 6-hypothesis trace contracts 6 -> 2 -> 1 in 2 calls."""
    fixture = json.loads((DATA / "country_extraction_replay.json").read_text())
    task = TaskSpec(
        fixture["task"]["task_id"],
        tuple((p["input"], p["output"]) for p in fixture["task"]["train"]),
        tuple(fixture["task"]["test_inputs"]),
        ground_truth_outputs=tuple(fixture["task"]["test_outputs"]),
    )
    space = VersionSpace(
        Hypothesis([OutputValue.value(v) for v in h["outputs"]], h["program_ids"])
        for h in fixture["hypotheses"]
    )
    transcript = Transcript(task_id=task.task_id, initial_class_size=len(space))
    for step in fixture["steps"]:
        transcript.append(TranscriptStep.from_json(step))

    final, tau, run_transcript = resolve_version_space(
        task, space, ReplayOracle(transcript)
    )
    sizes = [(s.size_before, s.size_after) for s in run_transcript.steps]
    candidate_sets = [
        [ov.unquoted() for ov in s.candidates.values()] for s in run_transcript.steps
    ]
    gt_key = tuple(ov.key for ov in task.ground_truth_as_outputs())
    ok = (
        tau == 2
        and sizes == [(6, 2), (2, 1)]
        and final.key == gt_key
        and set(candidate_sets[0]) == {"OR", "USA", ""}
        and set(candidate_sets[1]) == {"Croatia", ""}
    )
    _report(
        "recorded elimination trace",
        ok,
        f"sizes 6 -> 2 -> 1 in {tau} calls, candidates {candidate_sets}",
    )
