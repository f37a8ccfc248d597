import numpy as np
import pytest

from berglab import BallGeometry, QuadratureSpec


@pytest.fixture
def disk_geometry():
    return BallGeometry(1, 1, (1,))


@pytest.fixture
def split_geometry():
    # n=2 split 1+1: the smallest geometry with a nonempty inner ball
    return BallGeometry(2, 1, (1,))


@pytest.fixture
def gj_spec():
    return QuadratureSpec()


@pytest.fixture
def mc_spec():
    return QuadratureSpec(scheme="monte_carlo", n_samples=100_000, seed=20_260_813)


@pytest.fixture(autouse=True)
def _seed_numpy():
    # tests that use raw numpy randomness stay reproducible
    np.random.seed(0)
    yield
