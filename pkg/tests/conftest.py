import numpy as np
import pytest

from doublewell.core import DoubleBox, InfiniteBox, grid_for, sample_potential


@pytest.fixture
def box_samples():
    box = InfiniteBox(1.0)
    return sample_potential(box, grid_for(box, 400))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def double_box_samples(n, w=0.2, vb=500.0, L=1.0):
    box = DoubleBox(L, w, vb)
    return sample_potential(box, grid_for(box, n))
