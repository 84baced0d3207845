"""Shared fixtures and small helpers for the test suite."""

import re

import numpy as np
import pytest

# one line per acceptance criterion, echoed after the run so the verdicts
# are visible even when pytest captures stdout
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(
            ACCEPTANCE_LINES,
            key=lambda s: int(re.search(r"\d+", s).group()),
        ):
            terminalreporter.write_line(line)


@pytest.fixture
def gen():
    """A generously seeded generator, fresh per test."""
    return np.random.default_rng(20240817)


def random_spd(p, gen, jitter=0.5):
    """A well-conditioned random SPD matrix."""
    a = gen.standard_normal((p, p))
    return a @ a.T + jitter * np.eye(p)


def toy_mapped_data(n, p, gen):
    """Preprocessed-looking data: entries strictly inside (0, 1)."""
    return gen.uniform(0.05, 0.95, size=(n, p))
