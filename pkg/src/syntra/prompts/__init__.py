"""Prompt template loading and the shared rendering helpers.

Templates live as text assets inside this package; ``str.format`` slots are
UPPER_CASE. Task descriptions, when present, are prepended directly before
the input-output pairs section of any template that has one.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Iterable

from ..core import OutputValue, TaskSpec, Value, canonical_serialize

_PAIRS_HEADER = "Input-output pairs:"


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files("syntra.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")


def render_pairs(pairs: Iterable[tuple[Value, Value]]) -> str:
    lines = []
    for x, y in pairs:
        lines.append(f"Input: {canonical_serialize(x)}")
        lines.append(f"Output: {canonical_serialize(y)}")
    return "\n".join(lines)


def render_inputs(inputs: Iterable[Value]) -> str:
    return "\n".join(canonical_serialize(x) for x in inputs)


def candidate_literal(output: OutputValue) -> str:
    """How one candidate appears inside the prompt's candidate list.

    Proper values keep their canonical form; error and timeout texts are
    quoted so the list stays unambiguous.
    """
    if output.kind == "value":
        return output.text
    return json.dumps(output.text, ensure_ascii=False)


def render_candidates(outputs: Iterable[OutputValue]) -> str:
    return "[" + ", ".join(candidate_literal(ov) for ov in outputs) + "]"


def apply_description(prompt: str, task: TaskSpec) -> str:
    """Prepend the task description directly before the pairs section."""
    if not task.description:
        return prompt
    return prompt.replace(_PAIRS_HEADER, f"{task.description}\n\n{_PAIRS_HEADER}", 1)
