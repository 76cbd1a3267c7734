import numpy as np
import pytest
from hypothesis import settings

from plasmon_entangle.rates import RateMatrix
from plasmon_entangle.units import convert

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def ueV(x):
    return convert(x, "ueV", "rad/s")


@pytest.fixture
def groove_rates():
    return RateMatrix.symmetric(ueV(11.38), ueV(-6.48), ueV(5.8))


@pytest.fixture
def wire_rates():
    return RateMatrix.symmetric(ueV(6.5), ueV(-1.2), ueV(2.85))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report_criterion():
    def record(number: int, ok: bool, detail: str):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
