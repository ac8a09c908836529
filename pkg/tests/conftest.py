import math

import pytest
from hypothesis import HealthCheck, settings

from lpnorm.params import DerivedParams, PerturbationParams

settings.register_profile(
    "lpnorm", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lpnorm")

SQRT3 = math.sqrt(3.0)


@pytest.fixture
def classical():
    """Classical problem at mu = 0.01."""
    return PerturbationParams(mu=0.01)


@pytest.fixture
def perturbed():
    """Small perturbation of every kind at mu = 0.02."""
    return DerivedParams.from_values(0.02, 1e-3, 1e-3, 1e-4)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
