import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pgabase import demos  # noqa: E402


@pytest.fixture(scope="session", params=demos.DEMO_NAMES)
def demo(request):
    return demos.load_demo(request.param)


@pytest.fixture(scope="session")
def demo_models():
    return {name: demos.load_demo(name) for name in demos.DEMO_NAMES}


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
