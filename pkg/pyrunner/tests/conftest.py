import json
import os
import subprocess
import sys
import time
from pathlib import Path

import pytest

SRC = Path(__file__).parent.parent / "src"

# let `python -m pyrunner` work from a plain checkout
os.environ["PYTHONPATH"] = str(SRC) + os.pathsep + os.environ.get("PYTHONPATH", "")


class WorkerProcess:
    """Drives the worker over its real standard streams."""

    def __init__(self):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "pyrunner"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
        self.handshake = json.loads(self._read_line())
        self._counter = 0

    def _read_line(self, timeout=30.0):
        deadline = time.monotonic() + timeout
        line = self.proc.stdout.readline()
        if line == "" or time.monotonic() > deadline:
            raise RuntimeError("worker closed its response stream")
        return line

    def send_raw(self, text):
        self.proc.stdin.write(text + "\n")
        self.proc.stdin.flush()
        return json.loads(self._read_line())

    def request(self, source, inputs, timeout_ms=5000, entry="fn"):
        self._counter += 1
        request = {
            "id": f"req-{self._counter}",
            "source": source,
            "entry": entry,
            "inputs": inputs,
            "timeout_ms": timeout_ms,
        }
        response = self.send_raw(json.dumps(request))
        return request, response

    def results(self, source, inputs, **kwargs):
        request, response = self.request(source, inputs, **kwargs)
        assert response["id"] == request["id"]
        assert len(response["results"]) == len(inputs)
        return response["results"]

    def close(self):
        try:
            self.proc.stdin.close()
            self.proc.wait(timeout=5)
        except Exception:
            self.proc.kill()


@pytest.fixture(scope="module")
def worker():
    w = WorkerProcess()
    yield w
    w.close()
