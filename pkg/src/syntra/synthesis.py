"""Candidate-program generation strategies.

Three built-in strategies: ``static`` loads program files from disk (the
hermetic path used by fixtures), ``iid`` samples independent completions
of one code prompt, and ``aga`` first asks for distinct natural-language
algorithms and then translates each into code, yielding ``c * s`` programs
per task. The ``moc`` tag is a reserved adapter slot.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .core import Program, TaskSpec, Value
from .dsl import DslSyntaxError, parse_dsl
from .errors import ConfigError
from .prompts import apply_description, load_template, render_inputs, render_pairs

__all__ = ["SynthesisConfig", "generate", "extract_code", "parse_algorithm_map"]

log = logging.getLogger(__name__)

STRATEGIES = ("static", "iid", "aga", "moc")


@dataclass(frozen=True)
class SynthesisConfig:
    strategy: str = "static"
    K: int = 32
    c: int = 4
    s: int = 8
    temperature: float = 1.0
    include_test_inputs_in_prompt: bool = False
    target_language_tag: str = "dsl"
    program_dir: str | None = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown synthesis strategy {self.strategy!r}")
        if self.strategy == "aga" and self.K != self.c * self.s:
            raise ConfigError(f"aga requires K = c * s, got K={self.K}, c={self.c}, s={self.s}")
        if self.temperature < 0:
            raise ConfigError("temperature must be non-negative")
        if self.target_language_tag not in ("dsl", "guest"):
            raise ConfigError(f"unknown target language {self.target_language_tag!r}")


_FENCE_RE = re.compile(r"```([^\n`]*)\n?(.*?)```", re.DOTALL)


def extract_code(response: str) -> str:
    """The body of the last fenced code block, else the whole response."""
    blocks = _FENCE_RE.findall(response)
    if blocks:
        return blocks[-1][1].strip()
    return response.strip()


_NUMBERED_LINE_RE = re.compile(r'^\s*(\d+)\s*:\s*"(.*)"\s*,?\s*$')
_BARE_LINE_RE = re.compile(r"^\s*(\d+)\s*:\s*(.+?)\s*,?\s*$")


def parse_algorithm_map(response: str) -> dict[int, str]:
    """Parse the numbered-map algorithm format, tolerating missing entries."""
    algorithms: dict[int, str] = {}
    for line in response.splitlines():
        match = _NUMBERED_LINE_RE.match(line) or _BARE_LINE_RE.match(line)
        if not match:
            continue
        index = int(match.group(1))
        text = match.group(2).strip().strip('"')
        if text:
            algorithms.setdefault(index, text)
    return algorithms


def _describe_shape(value: Value) -> str:
    if isinstance(value, str):
        return "a string"
    if isinstance(value, bool):
        return "a boolean"
    if isinstance(value, int):
        return "an integer"
    if isinstance(value, float):
        return "a number"
    if isinstance(value, list):
        if value and all(isinstance(e, str) for e in value):
            return "a list of strings"
        return "a list"
    if isinstance(value, dict):
        return "an object"
    return "a value"


def _pairs_block(task: TaskSpec, cfg: SynthesisConfig) -> str:
    block = render_pairs(task.train_pairs)
    if cfg.include_test_inputs_in_prompt:
        block += "\n\nTest inputs:\n" + render_inputs(task.test_inputs)
    return block


def _code_prompt(task: TaskSpec, cfg: SynthesisConfig, algorithm: str | None) -> str:
    template = load_template("code_generation" if algorithm is not None else "iid_code_generation")
    x0, y0 = task.train_pairs[0]
    slots = {
        "INPUT_OUTPUT_PAIRS": _pairs_block(task, cfg),
        "INPUT_FORMAT": _describe_shape(x0),
        "OUTPUT_FORMAT": _describe_shape(y0),
    }
    if algorithm is not None:
        slots["ALGORITHM"] = algorithm
    return apply_description(template.format(**slots), task)


def _algorithm_prompt(task: TaskSpec, cfg: SynthesisConfig) -> str:
    prompt = load_template("algorithm_generation").format(
        NUM_ALGORITHMS=cfg.c,
        INPUT_OUTPUT_PAIRS=_pairs_block(task, cfg),
    )
    return apply_description(prompt, task)


def _make_program(task: TaskSpec, cfg: SynthesisConfig, source: str, program_id: str, provenance) -> Program | None:
    if cfg.target_language_tag == "dsl":
        try:
            parse_dsl(source)
        except DslSyntaxError as exc:
            log.warning("skipping unparseable program %s: %s", program_id, exc)
            return None
    return Program(
        program_id=program_id,
        source=source,
        language_tag=cfg.target_language_tag,
        provenance=provenance,
    )


def _generate_static(task: TaskSpec, cfg: SynthesisConfig) -> list[Program]:
    if not cfg.program_dir:
        raise ConfigError("static synthesis needs a program directory")
    root = Path(cfg.program_dir)
    if not root.is_dir():
        raise ConfigError(f"program directory {root} does not exist")
    programs = []
    for path in sorted(p for p in root.iterdir() if p.is_file()):
        program = _make_program(
            task,
            cfg,
            path.read_text(encoding="utf-8").strip(),
            program_id=f"{task.task_id}/{path.name}",
            provenance=str(path.name),
        )
        if program is not None:
            programs.append(program)
    return programs


def _generate_iid(task: TaskSpec, cfg: SynthesisConfig, client) -> list[Program]:
    if client is None:
        raise ConfigError("iid synthesis needs a chat client")
    prompt = _code_prompt(task, cfg, algorithm=None)
    programs = []
    for k in range(cfg.K):
        response = client.complete(prompt, temperature=cfg.temperature)
        program = _make_program(
            task,
            cfg,
            extract_code(response),
            program_id=f"{task.task_id}-iid-{k:03d}",
            provenance={"sample": k},
        )
        if program is not None:
            programs.append(program)
    return programs


def _generate_aga(task: TaskSpec, cfg: SynthesisConfig, client) -> list[Program]:
    if client is None:
        raise ConfigError("aga synthesis needs a chat client")
    programs = []
    for round_index in range(cfg.s):
        response = client.complete(_algorithm_prompt(task, cfg), temperature=cfg.temperature)
        algorithms = parse_algorithm_map(response)
        if not algorithms:
            log.warning("round %d produced no parseable algorithms", round_index)
            continue
        for alg_index in sorted(algorithms)[: cfg.c]:
            code_response = client.complete(
                _code_prompt(task, cfg, algorithms[alg_index]), temperature=cfg.temperature
            )
            program = _make_program(
                task,
                cfg,
                extract_code(code_response),
                program_id=f"{task.task_id}-aga-r{round_index:02d}a{alg_index:02d}",
                provenance={"round": round_index, "algorithm": alg_index},
            )
            if program is not None:
                programs.append(program)
    return programs


def generate(task: TaskSpec, cfg: SynthesisConfig, client=None) -> list[Program]:
    """Produce up to ``K`` candidate programs for a task.

    Response parse failures are logged and skipped, never fatal; transport
    failures propagate. Program ids are unique within a task run.
    """
    if cfg.strategy == "static":
        return _generate_static(task, cfg)
    if cfg.strategy == "iid":
        return _generate_iid(task, cfg, client)
    if cfg.strategy == "aga":
        return _generate_aga(task, cfg, client)
    raise ConfigError(f"synthesis strategy {cfg.strategy!r} is a reserved adapter slot")
