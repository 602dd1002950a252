import time
from contextlib import contextmanager

import pytest

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Context manager that times an acceptance criterion and records its outcome.

    A criterion passes when its block raises nothing and finishes inside the
    runtime budget; ``spent`` adds time already used by shared fixtures.  The
    outcome lines are printed at the end of the session.
    """

    @contextmanager
    def check(number: int, title: str, budget: float, spent: float = 0.0):
        start = time.perf_counter() - spent
        status = "FAIL"
        detail = ""
        try:
            yield
            elapsed = time.perf_counter() - start
            detail = f"{elapsed:.2f}s of {budget:g}s"
            assert elapsed < budget, f"criterion {number} took {elapsed:.2f}s, budget {budget:g}s"
            status = "PASS"
        except BaseException as exc:
            if not detail:
                detail = f"{type(exc).__name__}: {exc}".splitlines()[0]
            raise
        finally:
            _CRITERIA[number] = f"criterion {number:2d} {status}  {title} ({detail})"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
