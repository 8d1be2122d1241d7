import numpy as np
import pytest

from heatchern.models import exchange_triple, random_triple, zero_mode_triple


@pytest.fixture
def exchange():
    return exchange_triple()


@pytest.fixture
def zero_mode():
    return zero_mode_triple()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def triple_factory():
    return random_triple
