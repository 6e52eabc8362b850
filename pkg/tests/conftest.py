from __future__ import annotations

from contextlib import contextmanager

import pytest

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record PASS or FAIL for one numbered acceptance criterion."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    @contextmanager
    def record(number: int, title: str):
        results[number] = ("FAIL", title)
        yield
        results[number] = ("PASS", title)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"{status}  {number:2d}  {title}")
