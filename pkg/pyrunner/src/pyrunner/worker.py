"""The stdio worker: one JSON request per line, one JSON response per line.

Request:  {"id", "source", "entry", "inputs", "timeout_ms"}
Response: {"id", "results": [{"kind": "value"|"error"|"timeout", ...}]}

The worker announces ``{"protocol": 1}`` on startup and never emits
non-protocol bytes on stdout: guest code runs in children whose standard
streams point at /dev/null. A crashing request produces an error response
(or error results) and the worker keeps serving.
"""

from __future__ import annotations

import argparse
import json
import sys

from .sandbox import run_one

PROTOCOL_VERSION = 1


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
    sys.stdout.flush()


def _validate(request: object) -> str | None:
    if not isinstance(request, dict):
        return "request must be a JSON object"
    for field, kind in (("id", str), ("source", str), ("entry", str), ("inputs", list)):
        if not isinstance(request.get(field), kind):
            return f"missing or invalid field {field!r}"
    if not isinstance(request.get("timeout_ms"), int) or request["timeout_ms"] <= 0:
        return "missing or invalid field 'timeout_ms'"
    return None


def serve(in_stream=None, *, max_memory: int | None = None) -> None:
    stream = in_stream if in_stream is not None else sys.stdin
    _emit({"protocol": PROTOCOL_VERSION})
    for line in stream:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            _emit({"id": None, "error": f"invalid request line: {exc}"})
            continue
        problem = _validate(request)
        if problem is not None:
            request_id = request.get("id") if isinstance(request, dict) else None
            _emit({"id": request_id if isinstance(request_id, str) else None, "error": problem})
            continue
        results = [
            run_one(
                request["source"],
                request["entry"],
                value,
                request["timeout_ms"],
                max_memory=max_memory,
            )
            for value in request["inputs"]
        ]
        _emit({"id": request["id"], "results": results})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pyrunner")
    parser.add_argument(
        "--max-memory",
        type=int,
        default=None,
        help="address-space limit per guest process, in bytes",
    )
    args = parser.parse_args(argv)
    serve(max_memory=args.max_memory)
    return 0


if __name__ == "__main__":
    sys.exit(main())
