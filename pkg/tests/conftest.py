import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pkg", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_sessionstart(session):
    session.config.acceptance_start = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # the acceptance run reports suite runtime, so it goes last
    items.sort(key=lambda item: item.get_closest_marker("acceptance") is not None)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: criterion-level acceptance checks")
