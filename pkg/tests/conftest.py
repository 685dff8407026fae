import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from triconfig import _parallel

settings.register_profile(
    "triconfig",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("triconfig")

_parallel.set_max_workers(2)


@pytest.fixture(autouse=True)
def _quiet_resolution_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=r"eps=.*below twice the minimum")
        warnings.filterwarnings("ignore", message=r".*4x-atom-spacing floor.*")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
