import numpy as np
import pytest

from ssgranger.systems import example1, example2


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def ex2():
    return example2()


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)
