"""Synthetic fixtures: random hypothesis classes and generated string tasks.

The task generator draws a ground-truth program from the built-in string
language, renders train/test IO from random inputs, and builds a candidate
pool of the ground-truth program plus mutated variants. Every generated
task is realizable by construction (the pool contains the program that
produced the ground truth), which is exactly the filtered setting the
experiment protocols assume — with no remote model anywhere.
"""

from __future__ import annotations

import json
import random
import string
from pathlib import Path

from .core import Hypothesis, OutputValue, Program, TaskSpec, VersionSpace
from .dsl import DslProgram, eval_dsl, print_dsl
from .executor import DEFAULT_LIMITS, build_hypothesis_class, filter_consistent

__all__ = [
    "random_version_space",
    "skewed_version_space",
    "truncate_version_space",
    "random_output_value",
    "generate_dsl_task",
    "write_fixture_corpus",
]


def random_version_space(
    rng: random.Random,
    n_hypotheses: int,
    n_columns: int,
    alphabet: int = 4,
    *,
    distinct_prefix: int | None = None,
    with_mixed_kinds: bool = False,
) -> VersionSpace:
    """A version space of distinct random output tuples.

    Symbols are short strings drawn per cell from ``alphabet`` values. With
    ``distinct_prefix=k`` the tuples are pairwise distinct already within
    their first ``k`` columns, so truncating to any width >= k preserves
    the class size. ``with_mixed_kinds`` sprinkles error and timeout
    outputs among the candidates.
    """
    if n_hypotheses < 1 or n_columns < 1:
        raise ValueError("need at least one hypothesis and one column")
    prefix = distinct_prefix if distinct_prefix is not None else n_columns
    if not 1 <= prefix <= n_columns:
        raise ValueError("distinct_prefix must lie in [1, n_columns]")
    if alphabet**prefix < n_hypotheses:
        raise ValueError("alphabet too small for that many distinct hypotheses")

    def cell() -> OutputValue:
        if with_mixed_kinds:
            roll = rng.random()
            if roll < 0.08:
                return OutputValue.error(f"E{rng.randrange(alphabet)}")
            if roll < 0.12:
                return OutputValue.timeout()
        return OutputValue.value("v%d" % rng.randrange(alphabet))

    rows: list[tuple[OutputValue, ...]] = []
    seen: set[tuple] = set()
    attempts = 0
    while len(rows) < n_hypotheses:
        attempts += 1
        if attempts > 1000 * n_hypotheses:
            raise RuntimeError("could not draw enough distinct tuples")
        row = tuple(cell() for _ in range(n_columns))
        prefix_key = tuple(ov.key for ov in row[:prefix])
        if prefix_key in seen:
            continue
        seen.add(prefix_key)
        rows.append(row)
    hypotheses = [
        Hypothesis(row, (f"p{r:03d}",)) for r, row in enumerate(rows)
    ]
    return VersionSpace(hypotheses)


def skewed_version_space(
    rng: random.Random,
    n_hypotheses: int,
    n_columns: int,
    alphabet: int = 4,
    weak_fraction: float = 0.7,
    *,
    distinct_prefix: int | None = None,
) -> VersionSpace:
    """An edge-case-shaped version space.

    Most columns are "weak": nearly unanimous, with one or two hypotheses
    diverging — the shape real candidate pools produce, where programs
    disagree only on atypical inputs. The remaining columns draw uniformly.
    With ``distinct_prefix=k`` the first ``k`` columns are uniform and are
    required to separate all rows, so truncating to any width >= k keeps
    the class size fixed.
    """
    if n_hypotheses < 2 or n_columns < 1 or alphabet < 2:
        raise ValueError("need >= 2 hypotheses, >= 1 column, alphabet >= 2")
    prefix = distinct_prefix or 0
    if prefix and alphabet**prefix < n_hypotheses:
        raise ValueError("alphabet too small for a distinct prefix of that width")
    for _ in range(10_000):
        columns: list[list[str]] = []
        for j in range(n_columns):
            if j >= prefix and rng.random() < weak_fraction:
                base, other = rng.sample(range(alphabet), 2)
                column = [f"v{base}"] * n_hypotheses
                for r in rng.sample(range(n_hypotheses), rng.randint(1, min(2, n_hypotheses - 1))):
                    column[r] = f"v{other}"
            else:
                column = [f"v{rng.randrange(alphabet)}" for _ in range(n_hypotheses)]
            columns.append(column)
        rows = [tuple(columns[j][r] for j in range(n_columns)) for r in range(n_hypotheses)]
        check = prefix or n_columns
        if len({row[:check] for row in rows}) == n_hypotheses:
            return VersionSpace(
                [
                    Hypothesis([OutputValue.value(v) for v in row], (f"p{r:03d}",))
                    for r, row in enumerate(rows)
                ]
            )
    raise RuntimeError("could not draw a distinct hypothesis class")


def truncate_version_space(space: VersionSpace, n_columns: int) -> VersionSpace:
    """Restrict hypotheses to their first columns, merging duplicates."""
    if not 1 <= n_columns <= space.num_inputs:
        raise ValueError("truncation width out of range")
    grouped: dict[tuple, tuple[tuple[OutputValue, ...], list[str]]] = {}
    order = []
    for h in space.hypotheses:
        outputs = h.outputs[:n_columns]
        key = tuple(ov.key for ov in outputs)
        if key in grouped:
            grouped[key][1].extend(h.program_ids)
        else:
            grouped[key] = (outputs, list(h.program_ids))
            order.append(key)
    return VersionSpace(Hypothesis(grouped[k][0], grouped[k][1]) for k in order)


def random_output_value(rng: random.Random) -> OutputValue:
    roll = rng.random()
    if roll < 0.15:
        return OutputValue.error(f"E{rng.randrange(4)}")
    if roll < 0.2:
        return OutputValue.timeout()
    return OutputValue.value("v%d" % rng.randrange(4))


_SEPARATORS = [", ", ",", " ", "-"]
_CLASSES = ["alpha", "digit", "alnum", "not_upper"]


def _random_word(rng: random.Random) -> str:
    n = rng.randint(3, 8)
    word = "".join(rng.choice(string.ascii_lowercase) for _ in range(n))
    roll = rng.random()
    if roll < 0.25:
        word = word.capitalize()
    elif roll < 0.35:
        word = word + str(rng.randint(0, 99))
    return word


def _random_input(rng: random.Random) -> str:
    n_fields = rng.randint(3, 6)
    return ", ".join(_random_word(rng) for _ in range(n_fields))


def _random_base_ast(rng: random.Random) -> tuple:
    choice = rng.randrange(5)
    if choice == 0:
        return ("split_index", ("input",), rng.choice(_SEPARATORS), rng.randint(-3, 3))
    if choice == 1:
        return ("take_while_class", ("input",), rng.choice(_CLASSES))
    if choice == 2:
        return ("drop_while_class", ("input",), rng.choice(_CLASSES))
    if choice == 3:
        lo = rng.randint(0, 4)
        return ("substring", ("input",), lo, lo + rng.randint(1, 6))
    return ("replace", ("input",), rng.choice([",", " ", "a", "e"]), rng.choice(["", "-", "_"]))


def random_dsl_ast(rng: random.Random) -> tuple:
    ast = _random_base_ast(rng)
    roll = rng.random()
    if roll < 0.2:
        ast = ("upper" if rng.random() < 0.5 else "lower", ast)
    elif roll < 0.35:
        ast = ("strip", ast)
    elif roll < 0.45:
        ast = ("concat", ast, ("lit", rng.choice(["", "!", "x"])))
    return ast


def mutate_dsl_ast(rng: random.Random, ast: tuple) -> tuple:
    """One random structural perturbation of a program tree."""
    op = ast[0]
    roll = rng.random()
    if op == "split_index" and roll < 0.7:
        delta = rng.choice([-2, -1, 1, 2])
        return (op, ast[1], ast[2], ast[3] + delta)
    if op == "split_index":
        return (op, ast[1], rng.choice(_SEPARATORS), ast[3])
    if op in ("take_while_class", "drop_while_class"):
        if roll < 0.5:
            other = "drop_while_class" if op == "take_while_class" else "take_while_class"
            return (other, ast[1], ast[2])
        return (op, ast[1], rng.choice([c for c in _CLASSES if c != ast[2]]))
    if op == "substring":
        lo = max(0, ast[2] + rng.choice([-1, 0, 1]))
        hi = max(lo, ast[3] + rng.choice([-1, 1, 2]))
        return (op, ast[1], lo, hi)
    if op == "replace":
        return (op, ast[1], ast[2], ast[3] + rng.choice(["-", "_", "*"]))
    if op in ("upper", "lower", "strip", "concat"):
        if roll < 0.6 and isinstance(ast[1], tuple):
            return (op,) + (mutate_dsl_ast(rng, ast[1]),) + ast[2:]
        return ast[1]  # unwrap
    return ("strip", ast)


def generate_dsl_task(
    rng: random.Random,
    task_id: str,
    *,
    n_train: int = 1,
    n_test: int = 4,
    pool_size: int = 8,
    ensure_nontrivial: bool = True,
) -> tuple[TaskSpec, list[Program]]:
    """Draw one realizable task plus its candidate program pool."""
    fallback: tuple[TaskSpec, list[Program]] | None = None
    for _attempt in range(200):
        gt_ast = random_dsl_ast(rng)
        gt_program = DslProgram(gt_ast)
        inputs = [_random_input(rng) for _ in range(n_train + n_test)]
        outputs = [eval_dsl(gt_program, x) for x in inputs]
        if any(ov.kind != "value" for ov in outputs):
            continue
        train_pairs = [(x, ov.payload) for x, ov in zip(inputs[:n_train], outputs[:n_train])]
        test_inputs = inputs[n_train:]
        gt_outputs = [ov.payload for ov in outputs[n_train:]]
        task = TaskSpec(
            task_id=task_id,
            train_pairs=tuple(train_pairs),
            test_inputs=tuple(test_inputs),
            ground_truth_outputs=tuple(gt_outputs),
        )
        asts = [gt_ast]
        for _ in range(pool_size - 1):
            base = rng.choice(asts)
            mutated = base
            for _step in range(rng.randint(1, 2)):
                mutated = mutate_dsl_ast(rng, mutated)
            asts.append(mutated)
        rng.shuffle(asts)
        programs = [
            Program(
                program_id=f"{task_id}-p{i:02d}",
                source=print_dsl(ast),
                language_tag="dsl",
                provenance={"pool_index": i},
            )
            for i, ast in enumerate(asts)
        ]
        fallback = (task, programs)
        if ensure_nontrivial:
            survivors = filter_consistent(programs, task, DEFAULT_LIMITS)
            space = build_hypothesis_class(survivors, task, DEFAULT_LIMITS)
            if len(space) < 2:
                continue
        return task, programs
    if fallback is None:
        raise RuntimeError(f"could not draw a usable task for {task_id!r}")
    # A realizable but trivial class beats failing the whole corpus draw.
    return fallback


def write_fixture_corpus(
    out_dir: str | Path,
    n_tasks: int,
    seed: int = 0,
    *,
    n_train: int = 1,
    n_test: int = 4,
    pool_size: int = 8,
) -> tuple[Path, Path]:
    """Materialize a corpus: tasks.jsonl plus one program dir per task."""
    out = Path(out_dir)
    programs_root = out / "programs"
    programs_root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    lines = []
    for t in range(n_tasks):
        task_id = f"fixture-{t:04d}"
        task, programs = generate_dsl_task(
            rng, task_id, n_train=n_train, n_test=n_test, pool_size=pool_size
        )
        lines.append(json.dumps(task.to_json(), sort_keys=True, ensure_ascii=False))
        task_dir = programs_root / task_id
        task_dir.mkdir(parents=True, exist_ok=True)
        for i, program in enumerate(programs):
            (task_dir / f"p{i:02d}.dsl").write_text(program.source + "\n", encoding="utf-8")
    tasks_path = out / "tasks.jsonl"
    tasks_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return tasks_path, programs_root
