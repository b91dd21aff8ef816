from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conewave import build_basis, build_cone

settings.register_profile("conewave", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("conewave")


@pytest.fixture(scope="session")
def plane():
    return build_cone("circle", 2 * math.pi, 1.0)


@pytest.fixture(scope="session")
def wedge():
    return build_cone("circle", 1.5 * math.pi, 1.0)


@pytest.fixture(scope="session")
def small_plane_basis(plane):
    return build_basis(plane, 8, 24)


@pytest.fixture(scope="session")
def small_sphere_basis():
    return build_basis(build_cone("sphere", 2.0, 1.0), 6, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
