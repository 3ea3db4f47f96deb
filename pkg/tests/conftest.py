import numpy as np
import pytest

from chainqst.config import default_config
from chainqst.coupling import CouplingTarget, synthesize_schedule


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def chain(config):
    return config.chain


@pytest.fixture(scope="session")
def schedule(chain):
    return synthesize_schedule(chain, CouplingTarget(chain.n, duration=84.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
