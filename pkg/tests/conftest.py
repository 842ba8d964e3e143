import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from twoechelon.costs import CostParams  # noqa: E402
from twoechelon.demand import DemandModel  # noqa: E402

import oracles  # noqa: E402


@pytest.fixture
def params():
    return CostParams(0.3, 0.1, 0.5)


@pytest.fixture
def uniform():
    return DemandModel.uniform(1.0, 4.0)


CONTINUOUS = {
    "uniform": (lambda: DemandModel.uniform(1.0, 4.0), oracles.ref_uniform),
    "gaussian": (lambda: DemandModel.truncated_gaussian(3.0, 1.0, 1.0, 4.0), oracles.ref_gaussian),
    "exponential": (lambda: DemandModel.truncated_exponential(3.0, 1.0, 4.0), oracles.ref_exponential),
}


@pytest.fixture(params=sorted(CONTINUOUS))
def law_pair(request):
    """(package model, independent reference law) for each continuous kind."""
    make, ref = CONTINUOUS[request.param]
    return make(), ref()


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdict lines at the end of the run."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
