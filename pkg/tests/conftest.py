import sys
from pathlib import Path

import pytest

from syntra.executor import GuestRunner

TESTS_DIR = Path(__file__).parent


@pytest.fixture
def stub_runner():
    runner = GuestRunner([sys.executable, str(TESTS_DIR / "stub_worker.py")])
    yield runner
    runner.close()
