import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from haloslhe import SpatialKernel, StepEdgeSpec  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def canonical_step():
    """The 256x256, 200/800-level vertical edge used throughout."""
    return StepEdgeSpec(256, 256, 200, 800, 128)


@pytest.fixture
def box32():
    return SpatialKernel.box(32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
