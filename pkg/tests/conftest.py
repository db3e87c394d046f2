import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pentapod_asd.geometry import PentapodDesign

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SPATIAL_BASE = [
    [0.0, 0.0, 0.0],
    [14 / 33, 0.0, 0.0],
    [8 / 33, 4 / 33, 0.0],
    [7 / 33, 29 / 33, 32 / 33],
    [0.5, -0.25, 2 / 3],
]
SPATIAL_PLATFORM = [0.0, 0.4, 1.0, 1.3, 1.8]

PLANAR_BASE = [[0.0, 2.0, 0.0], [-1.5, 2.25, 0.0], [-3.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
PLANAR_PLATFORM = [0.0, 1.0, 2.0, 3.0, 4.0]
SINGULAR_T = -28 * math.sqrt(2) / 31
SAMPLE_T = 0.383206

LONG = os.environ.get("PENTAPOD_ASD_LONG") == "1"


@pytest.fixture(scope="session")
def spatial():
    return PentapodDesign(SPATIAL_BASE, SPATIAL_PLATFORM)


@pytest.fixture(scope="session")
def planar_template():
    return PentapodDesign(PLANAR_BASE, PLANAR_PLATFORM)


def planar_at(t):
    from pentapod_asd.pipeline import sweep_design

    return sweep_design(PentapodDesign(PLANAR_BASE, PLANAR_PLATFORM), t)


def random_design(rng, planar=False):
    base = rng.normal(size=(5, 3))
    if planar:
        base[:, 2] = 0.0
    return PentapodDesign(base, rng.normal(size=5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# PASS/FAIL lines from tests/test_acceptance.py, repeated in the terminal summary
ACCEPTANCE_LINES: list = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
