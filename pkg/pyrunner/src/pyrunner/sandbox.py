"""Isolated execution of one untrusted function call per child process.

Isolation is process-level: fork, own process group, resource limits, a
private scratch working directory, a scrubbed environment, and guard
patches that deny network access and writes outside the scratch dir.
These guards stop accidents and probes, not a determined attacker — there
are no bytecode-level guarantees.
"""

from __future__ import annotations

import builtins
import io
import math
import multiprocessing
import os
import resource
import shutil
import signal
import sys
import tempfile

# wall-clock slack the worker grants on top of the requested timeout
GRACE_SECONDS = 0.5

_FORK = multiprocessing.get_context("fork")

_SCRATCH_FSIZE = 8 * 1024 * 1024


def _install_guards(scratch: str) -> None:
    real_open = builtins.open
    scratch_root = os.path.realpath(scratch) + os.sep

    def guarded_open(file, mode="r", *args, **kwargs):
        if not isinstance(file, int) and any(flag in str(mode) for flag in ("w", "a", "x", "+")):
            path = os.path.realpath(os.fspath(file))
            if not path.startswith(scratch_root) and path != os.devnull:
                raise PermissionError(f"write access denied: {path}")
        return real_open(file, mode, *args, **kwargs)

    builtins.open = guarded_open
    io.open = guarded_open

    def denied(*_args, **_kwargs):
        raise OSError("network access denied")

    import socket

    socket.socket = denied
    socket.create_connection = denied
    socket.getaddrinfo = denied
    sys.modules["_socket"] = None  # fresh `import socket` fails too

    os.environ.clear()


def _apply_rlimits(timeout_s: float, max_memory: int | None) -> None:
    cpu = max(1, math.ceil(timeout_s) + 1)
    resource.setrlimit(resource.RLIMIT_CPU, (cpu, cpu))
    resource.setrlimit(resource.RLIMIT_FSIZE, (_SCRATCH_FSIZE, _SCRATCH_FSIZE))
    if max_memory:
        resource.setrlimit(resource.RLIMIT_AS, (max_memory, max_memory))


def sanitize(value):
    """Coerce a return value to the protocol's value tree.

    Strings, booleans, finite numbers, None, lists, and string-keyed maps
    pass through; anything else becomes its text representation.
    """
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, list):
        return [sanitize(item) for item in value]
    if isinstance(value, dict):
        if all(isinstance(k, str) for k in value):
            return {k: sanitize(v) for k, v in value.items()}
        return repr(value)
    return repr(value)


def format_exception(exc: BaseException) -> str:
    return f"{type(exc).__name__}({str(exc)!r})"


def _child(source: str, entry: str, value, timeout_s: float, max_memory, scratch: str, conn) -> None:
    try:
        os.setsid()
        devnull = os.open(os.devnull, os.O_RDWR)
        os.dup2(devnull, 1)
        os.dup2(devnull, 2)
        os.chdir(scratch)
        _apply_rlimits(timeout_s, max_memory)
        _install_guards(scratch)
    except BaseException as exc:  # sandbox setup failure, not a guest failure
        conn.send({"kind": "error", "payload": format_exception(exc)})
        os._exit(1)
    try:
        namespace: dict = {}
        exec(source, namespace)  # noqa: S102 - executing the guest is the point
        fn = namespace.get(entry)
        if fn is None:
            raise NameError(f"name {entry!r} is not defined")
        result = fn(value)
        conn.send({"kind": "value", "payload": sanitize(result)})
    except BaseException as exc:  # noqa: BLE001 - every guest failure is data
        try:
            conn.send({"kind": "error", "payload": format_exception(exc)})
        except Exception:
            os._exit(2)
    os._exit(0)


def run_one(source: str, entry: str, value, timeout_ms: int, max_memory: int | None = None) -> dict:
    """Run ``entry`` from ``source`` on one input in an isolated child.

    Returns a protocol result record; the call itself never raises on
    guest failure and never blocks past the timeout plus grace.
    """
    timeout_s = max(timeout_ms, 1) / 1000.0
    scratch = tempfile.mkdtemp(prefix="guest-")
    parent_conn, child_conn = _FORK.Pipe(duplex=False)
    process = _FORK.Process(
        target=_child, args=(source, entry, value, timeout_s, max_memory, scratch, child_conn)
    )
    process.start()
    child_conn.close()
    try:
        if parent_conn.poll(timeout_s):
            try:
                result = parent_conn.recv()
            except EOFError:
                result = {"kind": "error", "payload": "ProcessError('guest process died')"}
        else:
            result = {"kind": "timeout"}
    finally:
        if process.pid is not None:
            try:
                os.killpg(process.pid, signal.SIGKILL)
            except (ProcessLookupError, PermissionError):
                pass
        process.join(GRACE_SECONDS)
        if process.is_alive():
            process.kill()
            process.join(1.0)
        parent_conn.close()
        shutil.rmtree(scratch, ignore_errors=True)
    return result
