"""Candidate-program execution: run, filter against train pairs, and build
the deduplicated hypothesis class.

Programs tagged ``dsl`` run in-process through the built-in evaluator;
programs tagged ``guest`` go through the external runner protocol (JSON
lines over the worker's standard streams). Program failures are ordinary
error outputs; only a missing or protocol-breaking runner is a hard error.
"""

from __future__ import annotations

import json
import os
import select
import subprocess
import time
import uuid
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, MutableMapping, Sequence

from .core import (
    Hypothesis,
    OutputValue,
    Program,
    TaskSpec,
    Value,
    VersionSpace,
    canonical_serialize,
)
from .dsl import DslProgram, DslSyntaxError, eval_dsl, parse_dsl
from .errors import EmptyProgramPool, RunnerUnavailable

__all__ = [
    "ExecLimits",
    "GuestRunner",
    "run_program",
    "run_on_inputs",
    "filter_consistent",
    "build_hypothesis_class",
    "diversity_count",
]

# Wall-clock slack granted to the worker on top of the per-input timeout.
RUNNER_GRACE = 0.5


@dataclass(frozen=True)
class ExecLimits:
    """Execution limits; ``max_memory`` is advisory for external runners."""

    per_input_timeout: float = 5.0
    max_output_bytes: int = 65536
    max_memory: int | None = None

    def __post_init__(self) -> None:
        if self.per_input_timeout <= 0:
            raise ValueError("per_input_timeout must be positive")
        if self.max_output_bytes <= 0:
            raise ValueError("max_output_bytes must be positive")


DEFAULT_LIMITS = ExecLimits()

# cache key: (program_id, canonical input text)
Cache = MutableMapping[tuple[str, str], OutputValue]


@lru_cache(maxsize=16384)
def _parse_source(source: str) -> tuple[DslProgram | None, str | None]:
    try:
        return parse_dsl(source), None
    except DslSyntaxError as exc:
        return None, f"syntax error: {exc}"


def _run_dsl(program: Program, x: Value) -> OutputValue:
    parsed, error = _parse_source(program.source)
    if parsed is None:
        return OutputValue.error(error or "syntax error")
    return eval_dsl(parsed, x)


def _size_guard(output: OutputValue, limits: ExecLimits) -> OutputValue:
    if len(output.text.encode("utf-8")) > limits.max_output_bytes:
        return OutputValue.error("output too large")
    return output


class GuestRunner:
    """Client side of the external runner protocol.

    One request per line on the worker's stdin: ``{"id", "source",
    "entry", "inputs", "timeout_ms"}``; one response line per request:
    ``{"id", "results"}``. The worker announces itself with a
    ``{"protocol": 1}`` handshake line. A dead or protocol-breaking worker
    raises :class:`RunnerUnavailable` — never a fake program result.
    """

    def __init__(self, command: Sequence[str], *, startup_timeout: float = 10.0):
        if not command:
            raise RunnerUnavailable("no runner command configured")
        self._command = list(command)
        self._startup_timeout = startup_timeout
        self._proc: subprocess.Popen | None = None
        self._buffer = bytearray()

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                bufsize=0,
            )
        except OSError as exc:
            raise RunnerUnavailable(f"cannot start runner {self._command!r}: {exc}") from exc
        self._buffer = bytearray()
        handshake = self._read_record(time.monotonic() + self._startup_timeout)
        if handshake.get("protocol") != 1:
            self._shutdown()
            raise RunnerUnavailable(f"unexpected handshake from runner: {handshake!r}")

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._spawn()
        assert self._proc is not None
        return self._proc

    def _shutdown(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
                self._proc.wait(timeout=5)
            except OSError:
                pass
            self._proc = None

    def _read_record(self, deadline: float) -> dict:
        assert self._proc is not None and self._proc.stdout is not None
        fd = self._proc.stdout.fileno()
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = bytes(self._buffer[:newline])
                del self._buffer[: newline + 1]
                try:
                    record = json.loads(line.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    self._shutdown()
                    raise RunnerUnavailable(f"non-protocol bytes from runner: {exc}") from exc
                if not isinstance(record, dict):
                    self._shutdown()
                    raise RunnerUnavailable("non-object record from runner")
                return record
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._shutdown()
                raise RunnerUnavailable("runner response deadline exceeded")
            ready, _, _ = select.select([fd], [], [], min(remaining, 1.0))
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                self._shutdown()
                raise RunnerUnavailable("runner closed its response stream")
            self._buffer.extend(chunk)

    def run(self, program: Program, inputs: Sequence[Value], limits: ExecLimits) -> list[OutputValue]:
        proc = self._ensure()
        assert proc.stdin is not None
        request_id = uuid.uuid4().hex
        request = {
            "id": request_id,
            "source": program.source,
            "entry": "fn",
            "inputs": list(inputs),
            "timeout_ms": int(limits.per_input_timeout * 1000),
        }
        line = json.dumps(request, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        try:
            proc.stdin.write(line.encode("utf-8") + b"\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._shutdown()
            raise RunnerUnavailable(f"runner pipe closed: {exc}") from exc
        deadline = time.monotonic() + (limits.per_input_timeout + RUNNER_GRACE) * max(len(inputs), 1) + 5.0
        response = self._read_record(deadline)
        if response.get("id") != request_id:
            self._shutdown()
            raise RunnerUnavailable("runner response id mismatch")
        results = response.get("results")
        if not isinstance(results, list) or len(results) != len(inputs):
            self._shutdown()
            raise RunnerUnavailable("runner returned a malformed result list")
        outputs = []
        for item in results:
            outputs.append(_decode_result(item))
        return outputs

    def close(self) -> None:
        if self._proc is not None and self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        self._shutdown()

    def __enter__(self) -> "GuestRunner":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def _decode_result(item: object) -> OutputValue:
    if not isinstance(item, dict) or "kind" not in item:
        raise RunnerUnavailable(f"malformed result record: {item!r}")
    kind = item["kind"]
    if kind == "value":
        try:
            return OutputValue.value(item.get("payload"))
        except ValueError as exc:
            return OutputValue.error(f"unrepresentable output: {exc}")
    if kind == "error":
        payload = item.get("payload")
        return OutputValue.error(payload if isinstance(payload, str) else repr(payload))
    if kind == "timeout":
        return OutputValue.timeout()
    raise RunnerUnavailable(f"unknown result kind {kind!r}")


def run_on_inputs(
    program: Program,
    inputs: Sequence[Value],
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
    double_run: bool = False,
) -> list[OutputValue]:
    """Run one program on many inputs, batching guest executions."""
    keys = [canonical_serialize(x) for x in inputs]
    outputs: list[OutputValue | None] = [None] * len(inputs)
    missing: list[int] = []
    for i, key in enumerate(keys):
        if cache is not None and not double_run and (program.program_id, key) in cache:
            outputs[i] = cache[(program.program_id, key)]
        else:
            missing.append(i)
    if missing:
        fresh = _execute(program, [inputs[i] for i in missing], limits, runner, double_run)
        for i, ov in zip(missing, fresh):
            ov = _size_guard(ov, limits)
            outputs[i] = ov
            if cache is not None:
                cache[(program.program_id, keys[i])] = ov
    return [ov for ov in outputs if ov is not None]


def _execute(
    program: Program,
    inputs: Sequence[Value],
    limits: ExecLimits,
    runner: GuestRunner | None,
    double_run: bool,
) -> list[OutputValue]:
    first = _execute_once(program, inputs, limits, runner)
    if not double_run:
        return first
    second = _execute_once(program, inputs, limits, runner)
    return [
        a if a == b else OutputValue.error("nondeterministic")
        for a, b in zip(first, second)
    ]


def _execute_once(
    program: Program,
    inputs: Sequence[Value],
    limits: ExecLimits,
    runner: GuestRunner | None,
) -> list[OutputValue]:
    if program.language_tag == "dsl":
        return [_run_dsl(program, x) for x in inputs]
    if runner is None:
        raise RunnerUnavailable(
            f"program {program.program_id!r} needs a guest runner but none is configured"
        )
    return runner.run(program, inputs, limits)


def run_program(
    program: Program,
    x: Value,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
    double_run: bool = False,
) -> OutputValue:
    """Run one program on one input under the given limits."""
    return run_on_inputs(
        program, [x], limits, runner=runner, cache=cache, double_run=double_run
    )[0]


def filter_consistent(
    programs: Sequence[Program],
    task: TaskSpec,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> list[Program]:
    """Keep exactly the programs reproducing every train pair, in order."""
    expected = [OutputValue.value(y) for _, y in task.train_pairs]
    train_inputs = [x for x, _ in task.train_pairs]
    survivors = []
    for program in programs:
        actual = run_on_inputs(program, train_inputs, limits, runner=runner, cache=cache)
        if actual == expected:
            survivors.append(program)
    return survivors


def execution_matrix(
    programs: Sequence[Program],
    inputs: Sequence[Value],
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> list[tuple[Program, tuple[OutputValue, ...]]]:
    """Each program's output tuple on the given inputs, in program order."""
    return [
        (p, tuple(run_on_inputs(p, inputs, limits, runner=runner, cache=cache)))
        for p in programs
    ]


def build_hypothesis_class(
    survivors: Sequence[Program],
    task: TaskSpec,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> VersionSpace:
    """Execute survivors on the test inputs and deduplicate output tuples.

    One hypothesis per distinct tuple, in first-seen order, each listing
    all supporting program ids.
    """
    if not survivors:
        raise EmptyProgramPool(f"no surviving programs for task {task.task_id!r}")
    grouped: dict[tuple, tuple[tuple[OutputValue, ...], list[str]]] = {}
    order: list[tuple] = []
    for program, outputs in execution_matrix(
        survivors, task.test_inputs, limits, runner=runner, cache=cache
    ):
        key = tuple(ov.key for ov in outputs)
        if key in grouped:
            grouped[key][1].append(program.program_id)
        else:
            grouped[key] = (outputs, [program.program_id])
            order.append(key)
    hypotheses = [Hypothesis(grouped[k][0], grouped[k][1]) for k in order]
    return VersionSpace(hypotheses, resolved={}, iteration=0)


def diversity_count(
    programs: Sequence[Program],
    task: TaskSpec,
    limits: ExecLimits = DEFAULT_LIMITS,
    *,
    runner: GuestRunner | None = None,
    cache: Cache | None = None,
) -> int:
    """Number of distinct output tuples over train and test inputs jointly."""
    joint = [x for x, _ in task.train_pairs] + list(task.test_inputs)
    seen = set()
    for program in programs:
        outputs = run_on_inputs(program, joint, limits, runner=runner, cache=cache)
        seen.add(tuple(ov.key for ov in outputs))
    return len(seen)
