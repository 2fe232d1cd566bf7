import sys

import numpy as np
import pytest

from icmde import validate_family
from icmde.experiments import random_instance


@pytest.fixture
def two_model_family():
    """{(0.9, 0.1), (0.5, 0.5)} under a uniform prior."""
    return validate_family([[0.9, 0.1], [0.5, 0.5]], [0.5, 0.5], ids=["a", "b"], truth=[0.5, 0.5])


@pytest.fixture
def small_family():
    """Random 3-point, 4-model family with a truth; small enough for exact enumeration."""
    return random_instance(3, 4, np.random.default_rng(20240301))


@pytest.fixture
def medium_family():
    """Random 6-point, 10-model family with a truth."""
    return random_instance(6, 10, np.random.default_rng(6010))


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance criterion lines together, when that module ran."""
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance") and hasattr(m, "ACCEPTANCE_RESULTS")), None)
    if mod is None or not mod.ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.ACCEPTANCE_RESULTS):
        terminalreporter.write_line(mod.ACCEPTANCE_RESULTS[k])
