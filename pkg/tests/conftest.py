import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from models import random_model  # noqa: E402
from ostrogradsky import oscillator as osc  # noqa: E402


@pytest.fixture
def unit():
    return osc.OscillatorParams.isotropic(m=1.0, h=1.0, lam=1.0)


@pytest.fixture
def unit_spec(unit):
    return osc.make_oscillator(unit)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[0, 1])
def nonlinear(request):
    return random_model(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
