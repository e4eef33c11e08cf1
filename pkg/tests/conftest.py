import random

import pytest

from rankmetric.gf import field_make


@pytest.fixture
def gf2():
    return field_make(2)


@pytest.fixture
def gf3():
    return field_make(3)


@pytest.fixture
def gf4():
    return field_make(2, 2)


@pytest.fixture
def gf9():
    return field_make(3, 2)


@pytest.fixture
def rng():
    return random.Random(0x5EED)
