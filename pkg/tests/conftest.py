import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance lines collected by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def catalog_data():
    """Catalog data built once per session, keyed by (name, params)."""
    from hopfss.catalog import example
    cache = {}

    def get(name, **params):
        key = (name, tuple(sorted(params.items())))
        if key not in cache:
            cache[key] = example(name, **params)
        return cache[key]
    return get


@pytest.fixture(scope="session")
def ext_split(catalog_data):
    return catalog_data("exterior-split")


@pytest.fixture(scope="session")
def dual_a(catalog_data):
    return catalog_data("dualA-odd")


@pytest.fixture(scope="session")
def ext_small(catalog_data):
    return catalog_data("exterior-split", m=1, D=12)
