import numpy as np
import pytest

from mrmrfs.dataset import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(x, y, names=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = names or [f"f{j}" for j in range(x.shape[1])]
    return Dataset(x, np.asarray(y), tuple(names))


@pytest.fixture
def toy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 3))
    y = (x[:, 2] > 0).astype(int)
    return make_dataset(x, y)


# ------------------------------------------------------------ acceptance summary

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    """Store one PASS/FAIL line per acceptance criterion and assert on it."""

    def _record(criterion: int, title: str, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[criterion] = f"[{status}] criterion {criterion:2d}: {title} ({detail})"
        assert passed, ACCEPTANCE_LINES[criterion]

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
