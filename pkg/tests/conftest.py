"""Shared fixtures plus the acceptance-report hook.

Acceptance tests register one verdict line per criterion; the
terminal-summary hook reprints the collected lines at the end of the run
so the verdicts stay visible regardless of output capture settings.
"""

import time

import pytest

from contactopt.harness import run_bench
from contactopt.presets import experiment_preset

_ACCEPTANCE_LINES = []


class AcceptanceRecorder:
    """Collects one formatted pass/fail line per acceptance criterion."""

    def record(self, num: int, passed: bool, detail: str) -> bool:
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {num:2d}: {verdict} - {detail}"
        _ACCEPTANCE_LINES.append((num, line))
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


@pytest.fixture(scope="session")
def quartic_bench():
    """Tuned quartic benchmark at the pinned seed (slow: four optimizers,
    300 search trials each).  Returns (outcomes, elapsed seconds)."""
    spec = experiment_preset("quartic", scale="desk", master_seed=42)
    t0 = time.perf_counter()
    outcomes = run_bench(spec, jobs=1)
    return outcomes, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
