import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("qmlab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qmlab")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
