"""Shared test plumbing: the acceptance-criterion summary echoed at session end."""

from __future__ import annotations

import pytest

CRITERION_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[CRITERION_KEY] = []


@pytest.fixture
def criterion_log(request):
    """Session list of acceptance lines; anything appended here is echoed
    in the terminal summary so every criterion's verdict is visible even
    when its test passes (pytest otherwise swallows stdout of passing tests)."""
    return request.config.stash[CRITERION_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERION_KEY, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
