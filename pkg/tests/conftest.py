import math

import pytest

from mtcap.model import NetworkConfig


@pytest.fixture
def rayleigh():
    """d=2, alpha=4, beta=1, lambda_t=0.01, s=10, k=10."""
    return NetworkConfig(d=2, alpha=4.0, beta=1.0, s=10.0, lambda_t=0.01,
                         lambda_r=10 / (100 * math.pi), m=1, tau=1, epsilon=0.05)


@pytest.fixture
def small_cluster():
    """Cheap to simulate: s=3, about 5 receivers per cluster."""
    return NetworkConfig(d=2, alpha=4.0, beta=1.0, s=3.0, lambda_t=0.01,
                         lambda_r=5 / (9 * math.pi), m=1, tau=1, epsilon=0.05)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request, capsys):
    """Record a pass/fail line for an acceptance criterion; call as ``criterion(ok, detail)``."""

    def record(ok, detail):
        num = request.node.get_closest_marker("criterion").args[0]
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
