import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "hjt",
    max_examples=30,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hjt")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """``criterion(number, title)`` returns a checker that records one summary line."""

    def start(number: int, title: str):
        return _Criterion(number, title)

    return start


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, label: str, ok: bool, detail: str = ""):
        self.checks.append((label, bool(ok), detail))

    def finish(self):
        failed = [c for c in self.checks if not c[1]]
        status = "PASS" if not failed else "FAIL"
        shown = failed or self.checks
        detail = "; ".join(f"{label}: {d}" if d else label for label, _, d in shown)
        _CRITERIA[self.number] = f"criterion {self.number:2d} {status}  {self.title} ({detail})"
        assert not failed, "; ".join(f"{label}: {d}" for label, _, d in failed)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
