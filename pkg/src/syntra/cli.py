"""Operator entry point.

Subcommands: ``run``, ``record``, ``replay``, ``experiment scaling``,
``experiment unseen``, ``gen-fixtures``. Exit codes: 0 ok, 1 task-level
failures present, 2 configuration error, 3 transport error.
"""

from __future__ import annotations

import argparse
import csv
import json
import shlex
import sys
from pathlib import Path
from typing import Any, Sequence

from .core import TaskSpec, Transcript
from .errors import ConfigError, SchemaError, SyntraError, TransportError
from .executor import ExecLimits, GuestRunner
from .fixtures import write_fixture_corpus
from .harness import (
    APPROACHES,
    load_tasks,
    render_comparison,
    run_suite,
    run_unseen_experiment,
    scaling_experiment,
    write_metrics,
)
from .llm import ChatClient, HttpTransport, RecordingTransport
from .oracle import (
    AdversarialOracle,
    GroundTruthOracle,
    InteractiveOracle,
    LlmOracle,
    NoisyOracle,
    Oracle,
    ReplayOracle,
)
from .synthesis import SynthesisConfig, generate

_CONFIG_DEFAULTS: dict[str, Any] = {
    "dataset": None,
    "approach": "syntra-maximin",
    "oracle": "ground-truth",
    "epsilon": 0.1,
    "oracle_temperature": 0.7,
    "model": "default",
    "synthesis": "static",
    "programs": None,
    "K": 32,
    "c": 4,
    "s": 8,
    "synthesis_temperature": 1.0,
    "include_test_inputs": False,
    "language": "dsl",
    "runner_cmd": None,
    "timeout": 5.0,
    "max_output_bytes": 65536,
    "seed": 0,
    "parallelism": 1,
    "out": None,
}

ORACLE_KINDS = ("ground-truth", "noisy", "adversarial", "interactive", "llm")


def _load_config(path: str | None) -> dict[str, Any]:
    config = dict(_CONFIG_DEFAULTS)
    if path is None:
        return config
    try:
        loaded = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in loaded.items():
        if key not in _CONFIG_DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        config[key] = value
    return config


def _apply_overrides(config: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    for key in _CONFIG_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _build_limits(config: dict[str, Any]) -> ExecLimits:
    return ExecLimits(
        per_input_timeout=float(config["timeout"]),
        max_output_bytes=int(config["max_output_bytes"]),
    )


def _build_runner(config: dict[str, Any]) -> GuestRunner | None:
    if not config["runner_cmd"]:
        return None
    return GuestRunner(shlex.split(config["runner_cmd"]))


def _build_chat_client(config: dict[str, Any], out_dir: Path | None) -> ChatClient:
    transport: Any = HttpTransport()
    if out_dir is not None:
        transport = RecordingTransport(transport, out_dir / "llm_calls.jsonl")
    return ChatClient(transport, model=str(config["model"]))


def _build_oracle_factory(config: dict[str, Any], out_dir: Path | None):
    kind = config["oracle"]
    if kind == "ground-truth":
        return lambda task: GroundTruthOracle(task)
    if kind == "noisy":
        from .harness import _derive_seed

        epsilon = float(config["epsilon"])
        seed = int(config["seed"])
        return lambda task: NoisyOracle(task, epsilon, seed=_derive_seed(seed, task.task_id, "oracle"))
    if kind == "adversarial":
        return lambda task: AdversarialOracle()
    if kind == "interactive":
        return lambda task: InteractiveOracle()
    if kind == "llm":
        client = _build_chat_client(config, out_dir)
        temperature = float(config["oracle_temperature"])
        return lambda task: LlmOracle(client, temperature=temperature)
    raise ConfigError(f"unknown oracle kind {kind!r}; expected one of {ORACLE_KINDS}")


def _build_program_provider(config: dict[str, Any], out_dir: Path | None):
    strategy = config["synthesis"]
    base = SynthesisConfig(
        strategy=strategy,
        K=int(config["K"]),
        c=int(config["c"]),
        s=int(config["s"]),
        temperature=float(config["synthesis_temperature"]),
        include_test_inputs_in_prompt=bool(config["include_test_inputs"]),
        target_language_tag=config["language"],
        program_dir=None,
    )
    if strategy == "static":
        root = config["programs"]
        if not root:
            raise ConfigError("static synthesis needs --programs pointing at a program root")
        root_path = Path(root)
        if not root_path.is_dir():
            raise ConfigError(f"program root {root_path} does not exist")

        def provider(task: TaskSpec):
            cfg = SynthesisConfig(
                strategy="static",
                K=base.K,
                c=base.c,
                s=base.s,
                temperature=base.temperature,
                include_test_inputs_in_prompt=base.include_test_inputs_in_prompt,
                target_language_tag=base.target_language_tag,
                program_dir=str(root_path / task.task_id),
            )
            return generate(task, cfg)

        return provider
    client = _build_chat_client(config, out_dir)
    return lambda task: generate(task, base, client=client)


def _require_dataset(config: dict[str, Any]) -> list[TaskSpec]:
    if not config["dataset"]:
        raise ConfigError("no dataset given; pass --dataset or set it in the config file")
    return load_tasks(config["dataset"])


def _write_run_dir(out: Path, config: dict[str, Any], metrics) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_config.json").write_text(
        json.dumps(config, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    write_metrics([metrics], out)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if args.command == "record" and not config["out"]:
        raise ConfigError("record needs --out to store transcripts")
    if args.replay:
        return _run_replay(Path(args.replay), Path(config["out"]) if config["out"] else None)
    tasks = _require_dataset(config)
    out_dir = Path(config["out"]) if config["out"] else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    if config["oracle"] == "interactive":
        config["parallelism"] = 1
    provider = _build_program_provider(config, out_dir)
    oracle_factory = _build_oracle_factory(config, out_dir)
    runner = _build_runner(config)
    try:
        metrics = run_suite(
            tasks,
            config["approach"],
            program_provider=provider,
            oracle_factory=oracle_factory,
            limits=_build_limits(config),
            seed=int(config["seed"]),
            parallelism=int(config["parallelism"]),
            transcript_dir=(out_dir / "transcripts") if out_dir is not None else None,
            runner=runner,
        )
    finally:
        if runner is not None:
            runner.close()
    sys.stdout.write(render_comparison([metrics]))
    if out_dir is not None:
        _write_run_dir(out_dir, config, metrics)
    return 1 if metrics.hard_failures else 0


def _run_replay(run_dir: Path, out_dir: Path | None) -> int:
    config_path = run_dir / "run_config.json"
    if not config_path.is_file():
        raise ConfigError(f"{run_dir} holds no run_config.json; was it produced by `run --out`?")
    config = dict(_CONFIG_DEFAULTS)
    config.update(json.loads(config_path.read_text(encoding="utf-8")))
    if config["approach"] not in ("syntra-maximin", "syntra-random"):
        raise ConfigError("only recorded elimination runs can be replayed")
    tasks = _require_dataset(config)
    transcripts = run_dir / "transcripts"

    def oracle_factory(task: TaskSpec) -> Oracle:
        return ReplayOracle(Transcript.read(transcripts / f"{task.task_id}.jsonl"))

    out = out_dir if out_dir is not None else run_dir / "replay"
    out.mkdir(parents=True, exist_ok=True)
    metrics = run_suite(
        tasks,
        config["approach"],
        program_provider=_build_program_provider(config, None),
        oracle_factory=oracle_factory,
        limits=_build_limits(config),
        seed=int(config["seed"]),
        parallelism=int(config["parallelism"]),
        transcript_dir=out / "transcripts",
    )
    write_metrics([metrics], out)
    identical = all(
        (run_dir / name).read_bytes() == (out / name).read_bytes()
        for name in ("metrics.json", "metrics.txt")
    )
    sys.stdout.write(render_comparison([metrics]))
    sys.stdout.write(f"replay {'matches' if identical else 'DIVERGES FROM'} the recorded run\n")
    if metrics.hard_failures or not identical:
        return 1
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    return _run_replay(Path(args.run_dir), Path(args.out) if args.out else None)


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid {what} list {text!r}") from exc
    if not values:
        raise ConfigError(f"{what} list must be nonempty")
    return values


def _cmd_experiment(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    tasks = _require_dataset(config)
    out_dir = Path(config["out"]) if config["out"] else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    provider = _build_program_provider(config, None)
    oracle_factory = _build_oracle_factory(config, None)
    limits = _build_limits(config)
    if args.experiment == "scaling":
        approaches = [a.strip() for a in args.approaches.split(",") if a.strip()]
        if not approaches:
            raise ConfigError("approaches list must be nonempty")
        for approach in approaches:
            if approach not in APPROACHES:
                raise ConfigError(f"unknown approach {approach!r}")
        rows = scaling_experiment(
            tasks,
            _parse_int_list(args.n_values, "n-values"),
            approaches,
            program_provider=provider,
            oracle_factory=oracle_factory,
            limits=limits,
            seed=int(config["seed"]),
            parallelism=int(config["parallelism"])
        )
        path = out_dir / "scaling.csv"
    else:
        rows = run_unseen_experiment(
            tasks,
            _parse_int_list(args.visible_values, "visible-values"),
            args.holdout,
            program_provider=provider,
            oracle_factory=oracle_factory,
            limits=limits,
            seed=int(config["seed"]),
        )
        path = out_dir / "unseen.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        sys.stdout.write(json.dumps(row, sort_keys=True) + "\n")
    sys.stdout.write(f"wrote {path}\n")
    return 0


def _cmd_gen_fixtures(args: argparse.Namespace) -> int:
    tasks_path, programs_root = write_fixture_corpus(
        args.out,
        args.tasks,
        seed=args.seed,
        n_test=args.n_test,
        pool_size=args.pool_size,
    )
    sys.stdout.write(f"wrote {tasks_path} and {programs_root}\n")
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--dataset", help="task jsonl file or directory")
    parser.add_argument("--approach", choices=APPROACHES)
    parser.add_argument("--oracle", choices=ORACLE_KINDS)
    parser.add_argument("--epsilon", type=float, help="noisy-oracle flip probability")
    parser.add_argument("--oracle-temperature", dest="oracle_temperature", type=float)
    parser.add_argument("--model", help="remote model name")
    parser.add_argument("--synthesis", choices=("static", "iid", "aga", "moc"))
    parser.add_argument("--programs", help="program root for static synthesis (<root>/<task_id>/)")
    parser.add_argument("--K", type=int, dest="K")
    parser.add_argument("--c", type=int, dest="c")
    parser.add_argument("--s", type=int, dest="s")
    parser.add_argument("--synthesis-temperature", dest="synthesis_temperature", type=float)
    parser.add_argument(
        "--include-test-inputs", dest="include_test_inputs", action="store_const", const=True
    )
    parser.add_argument("--language", choices=("dsl", "guest"))
    parser.add_argument("--runner-cmd", dest="runner_cmd", help="guest runner command line")
    parser.add_argument("--timeout", type=float, help="per-input timeout seconds")
    parser.add_argument("--max-output-bytes", dest="max_output_bytes", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--parallelism", type=int)
    parser.add_argument("--out", help="output directory for reports and transcripts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syntra")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "run an approach over a task corpus"),
        ("record", "run and persist oracle transcripts (requires --out)"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        p.add_argument("--replay", help="replay a recorded run directory instead of querying")
        p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("replay", help="re-run from recorded transcripts and compare reports")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_replay)

    p = sub.add_parser("experiment", help="scaling and unseen-set protocols")
    exp = p.add_subparsers(dest="experiment", required=True)
    scaling = exp.add_parser("scaling", help="vary the visible test-input count")
    _add_config_flags(scaling)
    scaling.add_argument("--n-values", dest="n_values", default="5,10,20,40")
    scaling.add_argument(
        "--approaches", default="syntra-maximin,syntra-random", help="comma-separated approaches"
    )
    scaling.set_defaults(handler=_cmd_experiment)
    unseen = exp.add_parser("unseen", help="hold out inputs and score generalization")
    _add_config_flags(unseen)
    unseen.add_argument("--visible-values", dest="visible_values", default="5,10,20,40")
    unseen.add_argument("--holdout", type=int, default=10)
    unseen.set_defaults(handler=_cmd_experiment)

    p = sub.add_parser("gen-fixtures", help="generate a synthetic task corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--tasks", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-test", dest="n_test", type=int, default=4)
    p.add_argument("--pool-size", dest="pool_size", type=int, default=8)
    p.set_defaults(handler=_cmd_gen_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except (ConfigError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except TransportError as exc:
        sys.stderr.write(f"transport error: {exc}\n")
        return 3
    except SyntraError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
