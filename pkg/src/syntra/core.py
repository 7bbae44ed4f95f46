"""Core domain types: canonical values, program outputs, tasks, hypotheses.

Everything here is immutable after construction and safe to share across
concurrent workers. Output equality is defined on the canonical JSON
serialization, which doubles as the deduplication key and as the wire form
of the runner protocol.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Value",
    "canonical_serialize",
    "canonical_parse",
    "OutputValue",
    "TaskSpec",
    "Program",
    "Hypothesis",
    "VersionSpace",
    "CandidateSet",
    "TranscriptStep",
    "Transcript",
]

# A Value is a tagged tree: str | int | float | bool | None | list | str-keyed dict.
Value = Any

TIMEOUT_TEXT = "<timeout>"

_KINDS = ("value", "error", "timeout")


def _check_value(v: Value, path: str = "$") -> None:
    if v is None or isinstance(v, (str, bool)):
        return
    if isinstance(v, int):
        return
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"{path}: non-finite floats are not representable")
        return
    if isinstance(v, list):
        for i, item in enumerate(v):
            _check_value(item, f"{path}[{i}]")
        return
    if isinstance(v, dict):
        for k, item in v.items():
            if not isinstance(k, str):
                raise ValueError(f"{path}: map keys must be strings, got {type(k).__name__}")
            _check_value(item, f"{path}.{k}")
        return
    raise ValueError(f"{path}: unsupported value type {type(v).__name__}")


def canonical_serialize(value: Value) -> str:
    """Serialize a value to its canonical text form.

    The canonical form is compact JSON: sorted object keys, no insignificant
    whitespace, non-ASCII characters unescaped, floats in shortest
    round-trip notation. ``canonical_parse(canonical_serialize(v)) == v``.
    """
    _check_value(value)
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def _reject_constant(token: str) -> Value:
    raise ValueError(f"non-finite constant {token!r} is not a canonical value")


def canonical_parse(text: str) -> Value:
    """Inverse of :func:`canonical_serialize` (accepts any JSON text)."""
    return json.loads(text, parse_constant=_reject_constant)


class OutputValue:
    """A single execution result: a proper value, an error, or a timeout.

    Errors and timeouts are first-class comparable outputs, not exceptions:
    they participate in deduplication, candidate sets, and elimination just
    like ordinary values. Equality is kind-wise on the canonical text, so
    two value outputs are equal iff their canonical serializations are.
    """

    __slots__ = ("kind", "payload", "text")

    def __init__(self, kind: str, payload: Value | str | None = None):
        if kind == "value":
            text = canonical_serialize(payload)
        elif kind == "error":
            if not isinstance(payload, str):
                raise ValueError("error outputs carry a message string")
            text = payload
        elif kind == "timeout":
            if payload is not None:
                raise ValueError("timeout outputs carry no payload")
            text = TIMEOUT_TEXT
        else:
            raise ValueError(f"unknown output kind {kind!r}")
        self.kind = kind
        self.payload = payload
        self.text = text

    @classmethod
    def value(cls, v: Value) -> "OutputValue":
        return cls("value", v)

    @classmethod
    def error(cls, message: str) -> "OutputValue":
        return cls("error", message)

    @classmethod
    def timeout(cls) -> "OutputValue":
        return cls("timeout")

    @property
    def key(self) -> tuple[str, str]:
        """Deduplication key: (kind, canonical text)."""
        return (self.kind, self.text)

    def unquoted(self) -> str:
        """The bare string form: string payloads without JSON quotes."""
        if self.kind == "value" and isinstance(self.payload, str):
            return self.payload
        return self.text

    def to_json(self) -> dict:
        return {"kind": self.kind, "text": self.text}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "OutputValue":
        kind = obj["kind"]
        if kind == "value":
            return cls.value(canonical_parse(obj["text"]))
        if kind == "error":
            return cls.error(obj["text"])
        if kind == "timeout":
            return cls.timeout()
        raise ValueError(f"unknown output kind {kind!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutputValue):
            return NotImplemented
        return self.kind == other.kind and self.text == other.text

    def __hash__(self) -> int:
        return hash((self.kind, self.text))

    def __repr__(self) -> str:
        return f"OutputValue({self.kind}:{self.text!r})"


@dataclass(frozen=True)
class Program:
    """A candidate program: opaque source plus a routing tag."""

    program_id: str
    source: str
    language_tag: str = "dsl"
    provenance: Any = None

    def __post_init__(self) -> None:
        if self.language_tag not in ("dsl", "guest"):
            raise ValueError(f"unknown language tag {self.language_tag!r}")


@dataclass(frozen=True)
class TaskSpec:
    """A task: train pairs, visible test inputs, optional description.

    ``ground_truth_outputs`` exist for evaluation only and must never reach
    oracle-facing code paths except the ground-truth oracle itself; use
    :meth:`without_ground_truth` before building queries.
    """

    task_id: str
    train_pairs: tuple[tuple[Value, Value], ...]
    test_inputs: tuple[Value, ...]
    description: str | None = None
    ground_truth_outputs: tuple[Value, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "train_pairs", tuple((x, y) for x, y in self.train_pairs))
        object.__setattr__(self, "test_inputs", tuple(self.test_inputs))
        if self.ground_truth_outputs is not None:
            object.__setattr__(self, "ground_truth_outputs", tuple(self.ground_truth_outputs))
        if len(self.train_pairs) < 1:
            raise ValueError("a task needs at least one train pair")
        if len(self.test_inputs) < 1:
            raise ValueError("a task needs at least one test input")
        if self.ground_truth_outputs is not None and len(self.ground_truth_outputs) != len(self.test_inputs):
            raise ValueError("ground-truth outputs must match the number of test inputs")
        for x, y in self.train_pairs:
            _check_value(x)
            _check_value(y)
        for x in self.test_inputs:
            _check_value(x)
        if self.ground_truth_outputs is not None:
            for y in self.ground_truth_outputs:
                _check_value(y)

    @property
    def num_train(self) -> int:
        return len(self.train_pairs)

    @property
    def num_test(self) -> int:
        return len(self.test_inputs)

    def without_ground_truth(self) -> "TaskSpec":
        if self.ground_truth_outputs is None:
            return self
        return TaskSpec(
            task_id=self.task_id,
            train_pairs=self.train_pairs,
            test_inputs=self.test_inputs,
            description=self.description,
        )

    def truncated(self, n: int) -> "TaskSpec":
        """Keep only the first ``n`` test inputs (and their ground truth)."""
        if not 1 <= n <= self.num_test:
            raise ValueError(f"cannot truncate {self.num_test} test inputs to {n}")
        gt = self.ground_truth_outputs[:n] if self.ground_truth_outputs is not None else None
        return TaskSpec(
            task_id=self.task_id,
            train_pairs=self.train_pairs,
            test_inputs=self.test_inputs[:n],
            description=self.description,
            ground_truth_outputs=gt,
        )

    def ground_truth_as_outputs(self) -> tuple[OutputValue, ...] | None:
        if self.ground_truth_outputs is None:
            return None
        return tuple(OutputValue.value(y) for y in self.ground_truth_outputs)

    def to_json(self) -> dict:
        obj: dict[str, Any] = {
            "task_id": self.task_id,
            "train": [{"input": x, "output": y} for x, y in self.train_pairs],
            "test_inputs": list(self.test_inputs),
        }
        if self.description is not None:
            obj["description"] = self.description
        if self.ground_truth_outputs is not None:
            obj["test_outputs"] = list(self.ground_truth_outputs)
        return obj


class Hypothesis:
    """A deduplicated output tuple, one entry per test input, plus the ids
    of every candidate program whose execution produced exactly it.

    Identity is the output tuple: hypotheses are outputs, not programs.
    """

    __slots__ = ("outputs", "program_ids", "key")

    def __init__(self, outputs: Iterable[OutputValue], program_ids: Iterable[str]):
        self.outputs = tuple(outputs)
        self.program_ids = tuple(program_ids)
        if not self.outputs:
            raise ValueError("a hypothesis needs at least one output")
        if not self.program_ids:
            raise ValueError("a hypothesis needs at least one supporting program")
        self.key = tuple(ov.key for ov in self.outputs)

    def __len__(self) -> int:
        return len(self.outputs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypothesis):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Hypothesis({[ov.text for ov in self.outputs]}, programs={list(self.program_ids)})"


class VersionSpace:
    """The hypotheses still consistent with every accepted assignment.

    Hypotheses are kept in a deterministic order (first construction order)
    and are pairwise distinct by output tuple. ``resolved`` maps input index
    to the accepted output there; every member agrees with every resolved
    assignment.
    """

    __slots__ = ("hypotheses", "resolved", "iteration")

    def __init__(
        self,
        hypotheses: Iterable[Hypothesis],
        resolved: Mapping[int, OutputValue] | None = None,
        iteration: int = 0,
    ):
        hyps = tuple(hypotheses)
        if not hyps:
            raise ValueError("a version space must be nonempty")
        width = len(hyps[0])
        seen: set[tuple] = set()
        for h in hyps:
            if len(h) != width:
                raise ValueError("all hypotheses must cover the same test inputs")
            if h.key in seen:
                raise ValueError("hypotheses must be pairwise distinct by output tuple")
            seen.add(h.key)
        res = dict(resolved or {})
        for i, ov in res.items():
            if not 0 <= i < width:
                raise ValueError(f"resolved index {i} out of range")
            for h in hyps:
                if h.outputs[i] != ov:
                    raise ValueError(f"hypothesis disagrees with resolved assignment at index {i}")
        if iteration < 0:
            raise ValueError("iteration must be non-negative")
        self.hypotheses = hyps
        self.resolved = res
        self.iteration = iteration

    @property
    def num_inputs(self) -> int:
        return len(self.hypotheses[0])

    def column(self, i: int) -> tuple[OutputValue, ...]:
        return tuple(h.outputs[i] for h in self.hypotheses)

    def eliminate(self, index: int, chosen: OutputValue) -> "VersionSpace":
        """Keep only hypotheses whose output at ``index`` equals ``chosen``."""
        if index in self.resolved and self.resolved[index] != chosen:
            raise ValueError(f"index {index} already resolved to a different output")
        survivors = tuple(h for h in self.hypotheses if h.outputs[index] == chosen)
        if not survivors:
            raise ValueError("assignment eliminates every hypothesis; chosen output was not a candidate")
        resolved = dict(self.resolved)
        resolved[index] = chosen
        return VersionSpace(survivors, resolved, self.iteration + 1)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.hypotheses)

    def __repr__(self) -> str:
        return f"VersionSpace(|V|={len(self)}, t={self.iteration}, resolved={sorted(self.resolved)})"


@dataclass(frozen=True)
class CandidateSet:
    """Deduplicated candidate outputs for one input, with supporter counts.

    Presentation order is fixed (supporter count descending, then canonical
    text ascending) so oracle prompts and transcripts are reproducible.
    """

    input_index: int
    candidates: tuple[tuple[OutputValue, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple((ov, int(n)) for ov, n in self.candidates))
        if not self.candidates:
            raise ValueError("a candidate set must be nonempty")
        if any(n < 1 for _, n in self.candidates):
            raise ValueError("supporter counts must be positive")

    def values(self) -> tuple[OutputValue, ...]:
        return tuple(ov for ov, _ in self.candidates)

    def total_supporters(self) -> int:
        return sum(n for _, n in self.candidates)

    def find(self, output: OutputValue) -> OutputValue | None:
        for ov, _ in self.candidates:
            if ov == output:
                return ov
        return None

    def __len__(self) -> int:
        return len(self.candidates)

    def to_json(self) -> dict:
        return {
            "input_index": self.input_index,
            "candidates": [{"kind": ov.kind, "text": ov.text, "count": n} for ov, n in self.candidates],
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "CandidateSet":
        cands = tuple(
            (OutputValue.from_json(c), c["count"]) for c in obj["candidates"]
        )
        return cls(input_index=obj["input_index"], candidates=cands)


@dataclass
class TranscriptStep:
    """One oracle interaction: what was asked, answered, and eliminated."""

    iteration: int
    input_index: int
    candidates: CandidateSet
    raw_response: str
    chosen: OutputValue
    size_before: int
    size_after: int

    def to_json(self) -> dict:
        return {
            "type": "step",
            "iteration": self.iteration,
            "input_index": self.input_index,
            "candidates": self.candidates.to_json()["candidates"],
            "raw_response": self.raw_response,
            "chosen": self.chosen.to_json(),
            "size_before": self.size_before,
            "size_after": self.size_after,
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "TranscriptStep":
        return cls(
            iteration=obj["iteration"],
            input_index=obj["input_index"],
            candidates=CandidateSet.from_json(
                {"input_index": obj["input_index"], "candidates": obj["candidates"]}
            ),
            raw_response=obj["raw_response"],
            chosen=OutputValue.from_json(obj["chosen"]),
            size_before=obj["size_before"],
            size_after=obj["size_after"],
        )


@dataclass
class Transcript:
    """Ordered record of one task run's queries, answers, and eliminations.

    Serialized as one line-delimited record file per task run; replaying a
    transcript through the replay oracle reproduces the run exactly.
    """

    task_id: str
    initial_class_size: int | None = None
    steps: list[TranscriptStep] = field(default_factory=list)

    def append(self, step: TranscriptStep) -> None:
        self.steps.append(step)

    def to_jsonl(self) -> str:
        header = {"type": "header", "task_id": self.task_id, "initial_class_size": self.initial_class_size}
        lines = [json.dumps(header, sort_keys=True, ensure_ascii=False)]
        lines.extend(json.dumps(s.to_json(), sort_keys=True, ensure_ascii=False) for s in self.steps)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError("empty transcript")
        header = json.loads(lines[0])
        if header.get("type") != "header":
            raise ValueError("transcript must start with a header record")
        transcript = cls(task_id=header["task_id"], initial_class_size=header.get("initial_class_size"))
        for line in lines[1:]:
            obj = json.loads(line)
            if obj.get("type") != "step":
                raise ValueError(f"unexpected transcript record type {obj.get('type')!r}")
            transcript.append(TranscriptStep.from_json(obj))
        return transcript

    @classmethod
    def read(cls, path: str | Path) -> "Transcript":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))
