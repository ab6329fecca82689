import numpy as np
import pytest

from antisym import build_feature_map


@pytest.fixture(scope="session")
def spec21():
    return build_feature_map(2, 1)


@pytest.fixture(scope="session")
def spec32():
    return build_feature_map(3, 2)


@pytest.fixture(scope="session")
def spec43():
    return build_feature_map(4, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
