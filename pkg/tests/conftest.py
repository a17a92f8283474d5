import os

import pytest

from service.bench_service import BenchService
from service.curve_service import CurveService
from service.geocode_service import GeocodeService
from service.metrics_service import MetricsService

REPRODUCE_ENV = 'SFC_GEOHASH_REPRODUCE'


def pytest_collection_modifyitems(config, items):
    if os.environ.get(REPRODUCE_ENV) == '1':
        return
    skip = pytest.mark.skip(reason=f"set {REPRODUCE_ENV}=1 to run statistical and timing reproduction checks")
    for item in items:
        if 'reproduction' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def curve_service():
    return CurveService()


@pytest.fixture(scope='session')
def geocode_service(curve_service):
    return GeocodeService(curve_service)


@pytest.fixture(scope='session')
def metrics_service(geocode_service):
    return MetricsService(geocode_service)


@pytest.fixture(scope='session')
def bench_service(geocode_service):
    return BenchService(geocode_service)
