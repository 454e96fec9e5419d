import numpy as np
import pytest

from underact_smc.cli import bundled_config
from underact_smc.config import load_config
from underact_smc.sim import run


@pytest.fixture(scope="session")
def bundled_scenarios():
    return load_config(bundled_config())


@pytest.fixture(scope="session")
def bundled_traces(bundled_scenarios):
    return {name: run(sc.sim) for name, sc in bundled_scenarios.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
