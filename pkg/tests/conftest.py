import logging

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# thin transverse radii are the norm; silence the size warning in test output
logging.getLogger("pdisks.acs").setLevel(logging.ERROR)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
