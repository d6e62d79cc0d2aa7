import numpy as np
import pytest

from qtmtprune import LumaPlane


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rand_plane(rng, width, height):
    return LumaPlane(rng.integers(0, 256, size=(height, width), dtype=np.uint8))
