import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vspace.crypto import TEST256, TOY  # noqa: E402


@pytest.fixture
def rng():
    return random.Random(20240615)


@pytest.fixture
def toy():
    return TOY


@pytest.fixture
def group():
    return TEST256


# acceptance summary: one line per criterion, from the real test outcome

_CRITERIA: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    slot = _CRITERIA.setdefault(n, [title, None])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        if slot[1] != "FAIL":
            slot[1] = status


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status or 'NOT RUN'} - {title}")
