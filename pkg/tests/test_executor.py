"""Program execution, train filtering, and hypothesis-class construction."""

import time

import pytest

from syntra.core import OutputValue, Program, TaskSpec
from syntra.errors import EmptyProgramPool, RunnerUnavailable
from syntra.executor import (
    ExecLimits,
    build_hypothesis_class,
    diversity_count,
    filter_consistent,
    run_program,
)

IDENTITY = Program("identity", "(input)")
UPPER = Program("upper", "(upper (input))")
FIRST_FIELD = Program("first", '(split_index (input) "," 0)')

REMOVE_FIRST_LAST = Program(
    "remove-ends",
    "def fn(x):\n"
    "    s, ch = x[0], x[1]\n"
    "    i = s.index(ch)\n"
    "    j = s.rindex(ch)\n"
    "    if i == j:\n"
    "        return s[:i] + s[i + 1:]\n"
    "    return s[:i] + s[i + 1:j] + s[j + 1:]\n",
    language_tag="guest",
)


def task_of(train, test, gt=None):
    return TaskSpec("t", tuple(train), tuple(test), ground_truth_outputs=gt)


class TestRunProgramDsl:
    def test_identity(self):
        assert run_program(IDENTITY, "ac") == OutputValue.value("ac")

    def test_unparseable_source_is_program_failure(self):
        bad = Program("bad", "(concat")
        out = run_program(bad, "x")
        assert out.kind == "error" and out.payload.startswith("syntax error")

    def test_output_size_limit(self):
        limits = ExecLimits(max_output_bytes=4)
        out = run_program(IDENTITY, "abcdefgh", limits)
        assert out == OutputValue.error("output too large")

    def test_cache_reuses_results(self):
        cache = {}
        first = run_program(IDENTITY, "x", cache=cache)
        assert cache
        cache[("identity", '"x"')] = OutputValue.value("poisoned")
        assert run_program(IDENTITY, "x", cache=cache) == OutputValue.value("poisoned")
        assert first == OutputValue.value("x")

    def test_guest_without_runner_is_hard_error(self):
        with pytest.raises(RunnerUnavailable):
            run_program(REMOVE_FIRST_LAST, ["hello", "l"])


class TestGuestRunner:
    def test_guest_program_value(self, stub_runner):
        out = run_program(REMOVE_FIRST_LAST, ["hello", "l"], runner=stub_runner)
        assert out == OutputValue.value("heo")

    def test_guest_program_error_rendering(self, stub_runner):
        out = run_program(REMOVE_FIRST_LAST, ["lo", "a"], runner=stub_runner)
        assert out == OutputValue.error("ValueError('substring not found')")

    def test_guest_timeout_kind(self, stub_runner):
        prog = Program("loops", "#timeout\ndef fn(x):\n    return x\n", language_tag="guest")
        out = run_program(prog, "x", runner=stub_runner)
        assert out == OutputValue.timeout()

    def test_hung_worker_hits_client_deadline(self, stub_runner):
        prog = Program("hang", "#hang\ndef fn(x):\n    return x\n", language_tag="guest")
        limits = ExecLimits(per_input_timeout=0.2)
        started = time.monotonic()
        with pytest.raises(RunnerUnavailable):
            run_program(prog, "x", limits, runner=stub_runner)
        assert time.monotonic() - started < 30

    def test_worker_serves_after_program_failure(self, stub_runner):
        boom = Program("boom", "def fn(x):\n    raise RuntimeError('no')\n", language_tag="guest")
        assert run_program(boom, "x", runner=stub_runner).kind == "error"
        ok = Program("ok", "def fn(x):\n    return x\n", language_tag="guest")
        assert run_program(ok, "y", runner=stub_runner) == OutputValue.value("y")

    def test_missing_command_is_unavailable(self):
        from syntra.executor import GuestRunner

        runner = GuestRunner(["/nonexistent/worker-binary"])
        with pytest.raises(RunnerUnavailable):
            runner.run(REMOVE_FIRST_LAST, ["x"], ExecLimits())


class TestFilterConsistent:
    def test_retains_matching_program(self, stub_runner):
        task = task_of([(["hello", "l"], "heo")], [["xxx", "x"]])
        kept = filter_consistent([REMOVE_FIRST_LAST], task, runner=stub_runner)
        assert kept == [REMOVE_FIRST_LAST]

    def test_filters_erroring_program(self):
        task = task_of([("ab", "ab")], ["x"])
        bad = Program("oob", "(substring (input) 0 9)")
        assert filter_consistent([bad], task) == []

    def test_empty_program_list(self):
        assert filter_consistent([], task_of([("a", "a")], ["x"])) == []

    def test_order_preserved(self):
        task = task_of([("ab", "ab")], ["x"])
        progs = [Program("z", "(input)"), Program("a", "(input)"), UPPER]
        assert [p.program_id for p in filter_consistent(progs, task)] == ["z", "a"]


class TestBuildHypothesisClass:
    def test_dedup_by_output_tuple(self):
        task = task_of([("ab", "ab")], ["cd", "ef"])
        copy = Program("identity2", "(input)")
        space = build_hypothesis_class([IDENTITY, copy, UPPER], task)
        assert len(space) == 2
        by_key = {h.key: h for h in space.hypotheses}
        identity_key = tuple(OutputValue.value(v).key for v in ("cd", "ef"))
        assert set(by_key[identity_key].program_ids) == {"identity", "identity2"}

    def test_single_hypothesis_when_all_agree(self):
        task = task_of([("ab", "ab")], ["cd"])
        space = build_hypothesis_class([IDENTITY, Program("identity2", "(input)")], task)
        assert len(space) == 1

    def test_empty_survivors_raise(self):
        with pytest.raises(EmptyProgramPool):
            build_hypothesis_class([], task_of([("a", "a")], ["x"]))

    def test_every_survivor_in_exactly_one_hypothesis(self):
        task = task_of([("ab", "ab")], ["xy", "zw"])
        progs = [IDENTITY, Program("identity2", "(input)"), UPPER, FIRST_FIELD]
        space = build_hypothesis_class(progs, task)
        ids = [pid for h in space.hypotheses for pid in h.program_ids]
        assert sorted(ids) == sorted(p.program_id for p in progs)
        assert len(space) <= len(progs)

    def test_deterministic_across_runs(self):
        task = task_of([("ab", "ab")], ["xy", "zw"])
        progs = [IDENTITY, UPPER, FIRST_FIELD]
        a = build_hypothesis_class(progs, task)
        b = build_hypothesis_class(progs, task)
        assert [h.key for h in a.hypotheses] == [h.key for h in b.hypotheses]
        assert [h.program_ids for h in a.hypotheses] == [h.program_ids for h in b.hypotheses]


class TestDiversityCount:
    def test_copies_count_once(self):
        task = task_of([("ab", "ab")], ["cd"])
        clones = [Program(f"c{i}", "(input)") for i in range(32)]
        assert diversity_count(clones, task) == 1

    def test_differing_only_on_test_input(self):
        # both agree on train "ab" -> "ab"; they differ on the digit-bearing test input
        task = task_of([("ab", "ab")], ["a1"])
        keep_alpha = Program("alpha", "(take_while_class (input) alpha)")
        identity = IDENTITY
        assert diversity_count([identity, keep_alpha], task) == 2

    def test_error_outputs_distinguish(self):
        task = task_of([("ab", "ab")], ["x"])
        oob = Program("oob", "(substring (input) 0 9)")
        assert diversity_count([IDENTITY, oob], task) == 2


class TestDoubleRun:
    def test_nondeterministic_program_flagged(self):
        class FlakyRunner:
            def __init__(self):
                self.calls = 0

            def run(self, program, inputs, limits):
                self.calls += 1
                return [OutputValue.value(f"v{self.calls}") for _ in inputs]

        prog = Program("flaky", "def fn(x):\n    return x\n", language_tag="guest")
        out = run_program(prog, "x", runner=FlakyRunner(), double_run=True)
        assert out == OutputValue.error("nondeterministic")

    def test_deterministic_program_unaffected(self):
        out = run_program(IDENTITY, "x", double_run=True)
        assert out == OutputValue.value("x")
