import numpy as np
import pytest

from qmemsim.pair_source import paper_source
from qmemsim.spatial_modes import TransverseGrid


@pytest.fixture(scope="session")
def calibrated_source():
    return paper_source()


@pytest.fixture
def odd_grid():
    # odd size puts a pixel exactly on the optical axis
    return TransverseGrid(129, 129, 0.033)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting --------------------------------------------------

import contextlib  # noqa: E402
import time  # noqa: E402

_CRITERIA: dict[int, str] = {}


class _Criterion:
    def __init__(self, number, title, limit_s):
        self.number, self.title, self.limit_s = number, title, limit_s
        self.notes = []

    def note(self, text):
        self.notes.append(text)


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome and runtime."""

    @contextlib.contextmanager
    def run(number, title, limit_s):
        c = _Criterion(number, title, limit_s)
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield c
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            if status == "PASS" and elapsed >= limit_s:
                status = "FAIL"
            detail = "; ".join(c.notes)
            _CRITERIA[number] = (f"criterion {number} [{status}] {title} "
                                 f"({elapsed:.1f} s, limit {limit_s:g} s) {detail}")
        assert elapsed < limit_s, f"criterion {number} took {elapsed:.1f} s (limit {limit_s} s)"

    return run


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
