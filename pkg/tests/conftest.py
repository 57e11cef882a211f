from functools import lru_cache

import pytest

from bbgkz.cohomology import Cohomology
from bbgkz.fixtures import BUNDLED, load_fixture

ALL_TRIANGULATIONS = [(name, h) for name in BUNDLED for h in load_fixture(name).heights]


@lru_cache(maxsize=None)
def fixture(name):
    return load_fixture(name)


@lru_cache(maxsize=None)
def triangulation(name, heights=None):
    return fixture(name).triangulation(heights)


@lru_cache(maxsize=None)
def cohomology(name, heights=None):
    return Cohomology(triangulation(name, heights))


@pytest.fixture
def a1():
    return fixture("a1").cone


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numeric checks")
