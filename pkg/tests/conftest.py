import numpy as np
import pytest

from hgmimo.beam import optimize_waist
from hgmimo.config import ScenarioConfig
from hgmimo.linkmetrics import scenario_channel


@pytest.fixture(scope="session")
def ref_beam():
    return optimize_waist(1e-3, 20.0).beam


@pytest.fixture(scope="session")
def ref_cfg():
    return ScenarioConfig().validate()


@pytest.fixture(scope="session")
def ref_hmod(ref_cfg):
    """Boresight 36-mode effective channel of the reference scenario (a few seconds)."""
    return scenario_channel(ref_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
