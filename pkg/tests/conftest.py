import numpy as np
import pytest

from hyperbgc.bio_optics import bundled_water_iops
from hyperbgc.fixtures import make_fixture_library
from hyperbgc.synthetic import generate_dataset


@pytest.fixture(scope="session")
def tables():
    return bundled_water_iops()


@pytest.fixture(scope="session")
def library247():
    return make_fixture_library(247, seed=7)


@pytest.fixture(scope="session")
def library_small():
    return make_fixture_library(60, seed=3)


@pytest.fixture(scope="session")
def dataset2k(library247):
    """Small synthetic dataset shared by unit tests."""
    return generate_dataset(library247, k=2000, seed=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
