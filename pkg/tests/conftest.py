import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hydrogauge.basis import BasisSpec, build_basis  # noqa: E402
from hydrogauge.fields import make_envelope  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def basis3():
    return build_basis(BasisSpec(n_max=3))


@pytest.fixture(scope="session")
def basis2():
    return build_basis(BasisSpec(n_max=2))


@pytest.fixture(scope="session")
def trapezoid():
    return make_envelope("trapezoid", t1=0.0, t1_plus=20.0, t2_minus=80.0, t2=100.0)


@pytest.fixture(scope="session")
def zero_avg():
    return make_envelope("zero-average-sine", t0=0.0, duration=60.0, omega=0.375)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
